//! Approximate sampling for networks whose input modes split into a few
//! short-path modes and many modes behind long, lossy paths.
//!
//! The front loss layer of the network is split: lossy modes give up a
//! common `eta_eff = eta^{c ln n}` that is applied to the input photons
//! directly, and the remainder of their front loss stays with the residual
//! network. Surviving photons of the lossy modes are then handed to a
//! strategy that emits a type-B input (single photons on the short-path
//! modes plus one bin), which is sampled exactly through the dilated
//! residual network.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tv_bound_network, TvBound};
use crate::complexmat::{CMatrix, UnitaryMatrix};
use crate::fock::OccupationVector;
use crate::network::{extract_losses, shortest_paths, ExtractionResult, LossyNetwork, StandaloneLoss};
use crate::sampler::{sample, shot_rng, SampleOutcome};
use crate::{Error, Result};

/// A type-B input `(1, ..., 1, n_alpha, 0, ...)` in template coordinates,
/// where the first `k` modes stand for the short-path modes, plus an
/// optional unitary applied before the network.
#[derive(Clone, Debug, PartialEq)]
pub struct Approximation {
    pub input: OccupationVector,
    pub unitary: Option<UnitaryMatrix>,
}

/// Maps the survivors of the lossy modes to a particle-separable input.
/// Implementations must be pure functions of their arguments.
pub trait ApproximationStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Input for `survivors` photons left in the lossy modes, `lossless`
    /// short-path single photons, on `modes` modes.
    fn approximate(&self, survivors: usize, lossless: usize, modes: usize) -> Result<Approximation>;
}

/// All survivors in the bin right after the short-path modes, no unitary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SingleBinStrategy;

impl ApproximationStrategy for SingleBinStrategy {
    fn name(&self) -> &str {
        "single-bin"
    }

    fn approximate(&self, survivors: usize, lossless: usize, modes: usize) -> Result<Approximation> {
        let needed = lossless + usize::from(survivors > 0);
        if needed > modes {
            return Err(Error::InvalidParameter(format!(
                "template with {lossless} singles and a bin does not fit in {modes} modes"
            )));
        }
        let mut v = vec![0; modes];
        v[..lossless].iter_mut().for_each(|x| *x = 1);
        if survivors > 0 {
            v[lossless] = survivors;
        }
        Ok(Approximation { input: OccupationVector::new(v)?, unitary: None })
    }
}

pub fn default_strategy() -> SingleBinStrategy {
    SingleBinStrategy
}

fn check_approximation(a: &Approximation, survivors: usize, lossless: usize, modes: usize) -> Result<()> {
    let s = a.input.as_slice();
    let bad = |why: &str| Err(Error::InvalidParameter(format!("strategy emitted {}: {why}", a.input)));
    if s.len() != modes {
        return bad("wrong number of modes");
    }
    if s[..lossless].iter().any(|&x| x != 1) {
        return bad("short-path modes must hold one photon each");
    }
    let bin = s.get(lossless).copied().unwrap_or(0);
    if bin != survivors || s.iter().skip(lossless + 1).any(|&x| x != 0) {
        return bad("survivors must sit in the single bin after the short-path modes");
    }
    if let Some(u) = &a.unitary {
        if u.dim() != modes {
            return bad("unitary has the wrong dimension");
        }
        let m = u.matrix();
        for i in 0..modes {
            for j in 0..modes {
                if i < lossless || j < lossless {
                    let target = if i == j { 1.0 } else { 0.0 };
                    if (m[(i, j)] - target).norm() > 1e-10 {
                        return bad("unitary must act as the identity on the short-path modes");
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Constant `c` of the short-path threshold `c ln n`.
    pub c: f64,
    /// The number of short-path modes may not exceed `kappa ln n`.
    pub kappa: f64,
    /// Accept inputs other than `(1, ..., 1, 0, ..., 0)`.
    pub allow_nonstandard: bool,
    /// Largest system-plus-environment size of the dilated residual.
    pub max_dilated_modes: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { c: 1.0, kappa: 3.0, allow_nonstandard: false, max_dilated_modes: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub c: f64,
    pub c_threshold: Option<f64>,
    pub delta: f64,
    pub eta: f64,
    pub eta_eff: f64,
    pub k: usize,
    pub n: usize,
    pub strategy: String,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization cannot fail")
    }
}

#[derive(Clone, Debug)]
enum Target {
    Lossless(UnitaryMatrix),
    Dilated { unitary: UnitaryMatrix, environment: usize },
}

/// One pipeline shot.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineShot {
    /// Sampler output on the full system-plus-environment mode set; its
    /// probability refers to that joint outcome.
    pub sample: SampleOutcome,
    /// Photon counts on the network's own modes.
    pub system: OccupationVector,
    /// Type-B input in template coordinates.
    pub emitted: OccupationVector,
    pub survivors: usize,
}

impl PipelineShot {
    /// The sample with its outcome restricted to the system modes.
    pub fn system_outcome(&self) -> SampleOutcome {
        SampleOutcome { outcome: self.system.clone(), ..self.sample.clone() }
    }
}

/// Everything that does not change from shot to shot.
#[derive(Clone, Debug)]
pub struct UnbalancedSimulation<S> {
    strategy: S,
    input: OccupationVector,
    short: Vec<usize>,
    lossy: Vec<usize>,
    eta_eff: f64,
    bound: TvBound,
    certificate: Certificate,
    extraction: Option<ExtractionResult>,
    target: Target,
}

impl<S: ApproximationStrategy> UnbalancedSimulation<S> {
    pub fn prepare(net: &LossyNetwork, input: &OccupationVector, strategy: S, config: &PipelineConfig) -> Result<Self> {
        let m = net.modes();
        if input.modes() != m {
            return Err(Error::DimensionMismatch(format!("{}-mode input for a {m}-mode network", input.modes())));
        }
        if !config.allow_nonstandard && !input.is_standard() {
            return Err(Error::Hypothesis(format!("input {input} is not of the form (1,...,1,0,...,0)")));
        }
        let n = input.photons();
        if n == 0 {
            return Err(Error::InvalidParameter("the pipeline needs at least one photon".into()));
        }

        if net.is_lossless() {
            let certificate = Certificate {
                c: config.c,
                c_threshold: None,
                delta: 0.0,
                eta: 1.0,
                eta_eff: 1.0,
                k: 0,
                n,
                strategy: "exact".into(),
            };
            let bound = TvBound { delta: 0.0, leading: 0.0, tail: 0.0, eta_eff: 1.0, c_threshold: None };
            return Ok(Self {
                strategy,
                input: input.clone(),
                short: Vec::new(),
                lossy: Vec::new(),
                eta_eff: 1.0,
                bound,
                certificate,
                extraction: None,
                target: Target::Lossless(net.compose_unitary()?),
            });
        }

        let eta = net
            .elements()
            .iter()
            .flat_map(|e| [e.eta.0, e.eta.1])
            .fold(0.0f64, f64::max);
        if !(eta < 1.0) {
            return Err(Error::Hypothesis(
                "every beam-splitter arm must be lossy for the loss bound to apply".into(),
            ));
        }
        let extraction = extract_losses(net)?;
        let paths = shortest_paths(net);
        let ln_n = (n as f64).ln();
        let threshold = config.c * ln_n;
        let occupied: Vec<usize> = (0..m).filter(|&i| input.get(i) > 0).collect();
        let (short, lossy): (Vec<usize>, Vec<usize>) =
            occupied.iter().partition(|&&i| (paths[i] as f64) < threshold);
        let k = short.len();
        if k as f64 > config.kappa * ln_n {
            return Err(Error::Hypothesis(format!(
                "{k} short-path modes exceed the budget {:.3} ln n = {:.3}",
                config.kappa,
                config.kappa * ln_n
            )));
        }
        if short.iter().any(|&i| input.get(i) != 1) {
            return Err(Error::Hypothesis("short-path modes must carry single photons".into()));
        }

        let bound = tv_bound_network(n, k, eta, config.c)?;
        let eta_eff = bound.eta_eff;
        let front = extraction.front.as_slice();
        let mut losses: Vec<StandaloneLoss> = (0..m)
            .map(|i| {
                let eta = if lossy.contains(&i) { (front[i] / eta_eff).min(1.0) } else { front[i] };
                StandaloneLoss { after_layer: -1, mode: i, eta }
            })
            .filter(|l| l.eta < 1.0)
            .collect();
        losses.extend_from_slice(extraction.residual.standalone_losses());
        let remaining = LossyNetwork::new(m, extraction.residual.elements().to_vec(), losses)?;
        let total = m + remaining.loss_count();
        if total > config.max_dilated_modes {
            return Err(Error::DeskLimit(format!(
                "dilated residual needs {total} modes, limit is {}",
                config.max_dilated_modes
            )));
        }
        let dilation = remaining.dilate()?;
        let certificate = Certificate {
            c: config.c,
            c_threshold: bound.c_threshold,
            delta: bound.delta,
            eta,
            eta_eff,
            k,
            n,
            strategy: strategy.name().to_string(),
        };
        Ok(Self {
            strategy,
            input: input.clone(),
            short,
            lossy,
            eta_eff,
            bound,
            certificate,
            extraction: Some(extraction),
            target: Target::Dilated { unitary: dilation.unitary, environment: dilation.environment },
        })
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn bound(&self) -> TvBound {
        self.bound
    }

    pub fn extraction(&self) -> Option<&ExtractionResult> {
        self.extraction.as_ref()
    }

    /// Occupied input modes whose shortest path is below `c ln n`.
    pub fn short_modes(&self) -> &[usize] {
        &self.short
    }

    pub fn lossy_modes(&self) -> &[usize] {
        &self.lossy
    }

    /// Modes the sampler runs on: the system modes plus one environment mode
    /// per remaining loss.
    pub fn sampled_modes(&self) -> usize {
        match &self.target {
            Target::Lossless(u) => u.dim(),
            Target::Dilated { unitary, .. } => unitary.dim(),
        }
    }

    /// Physical mode of every template mode: the short-path modes first,
    /// then the first lossy mode as the bin, then the rest in order.
    fn placement(&self, modes: usize) -> Vec<usize> {
        let mut order: Vec<usize> = self.short.clone();
        order.extend(self.lossy.first());
        order.extend((0..modes).filter(|i| !self.short.contains(i) && self.lossy.first() != Some(i)));
        order
    }

    pub fn shot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PipelineShot> {
        let (unitary, environment) = match &self.target {
            Target::Lossless(u) => {
                let sample = sample(u, &self.input, rng)?;
                return Ok(PipelineShot {
                    system: sample.outcome.clone(),
                    emitted: self.input.clone(),
                    survivors: self.input.photons(),
                    sample,
                });
            }
            Target::Dilated { unitary, environment } => (unitary, *environment),
        };
        let m = self.input.modes();
        let mut survivors = 0usize;
        for &i in &self.lossy {
            let law = Binomial::new(self.input.get(i) as u64, self.eta_eff)
                .map_err(|e| Error::Numerical(e.to_string()))?;
            survivors += law.sample(rng) as usize;
        }
        let k = self.short.len();
        let approx = self.strategy.approximate(survivors, k, m)?;
        check_approximation(&approx, survivors, k, m)?;

        let place = self.placement(m);
        let mut physical = vec![0usize; m];
        for (j, &x) in approx.input.as_slice().iter().enumerate() {
            physical[place[j]] = x;
        }
        let input = OccupationVector::new(physical)?.padded(environment);
        let sample = match &approx.unitary {
            None => sample(unitary, &input, rng)?,
            Some(u_alpha) => {
                let total = unitary.dim();
                let mut before = CMatrix::identity(total, total);
                for a in 0..m {
                    for b in 0..m {
                        before[(place[a], place[b])] = u_alpha.matrix()[(a, b)];
                    }
                }
                let combined = UnitaryMatrix::new(unitary.matrix() * before)?;
                sample(&combined, &input, rng)?
            }
        };
        Ok(PipelineShot {
            system: sample.outcome.truncated(m)?,
            emitted: approx.input,
            survivors,
            sample,
        })
    }

    /// `shots` shots, shot `i` drawn from [`shot_rng`]`(seed, i)`.
    pub fn run(&self, shots: usize, seed: u64) -> Result<Vec<PipelineShot>> {
        (0..shots as u64)
            .into_par_iter()
            .map(|shot| self.shot(&mut shot_rng(seed, shot)))
            .collect()
    }
}

/// One pipeline shot with the default configuration apart from `c`.
pub fn simulate_unbalanced<S: ApproximationStrategy, R: Rng + ?Sized>(
    net: &LossyNetwork,
    input: &OccupationVector,
    strategy: S,
    c: f64,
    rng: &mut R,
) -> Result<(SampleOutcome, TvBound)> {
    let config = PipelineConfig { c, ..PipelineConfig::default() };
    let sim = UnbalancedSimulation::prepare(net, input, strategy, &config)?;
    let shot = sim.shot(rng)?;
    Ok((shot.system_outcome(), sim.bound()))
}
