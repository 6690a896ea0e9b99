//! Loss channels, total-variation bound calculators and the approximate
//! pipeline for unbalanced lossy networks.

mod pipeline;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::fock::OccupationVector;
use crate::network::LossVector;
use crate::oracle::OutcomeDistribution;
use crate::{Error, Result};

pub use pipeline::{
    default_strategy, simulate_unbalanced, Approximation, ApproximationStrategy, Certificate,
    PipelineConfig, PipelineShot, SingleBinStrategy, UnbalancedSimulation,
};

/// Each photon in mode `i` survives independently with probability `eta_i`.
#[derive(Clone, Debug, PartialEq)]
pub enum LossChannelSpec {
    Uniform(f64),
    Nonuniform(LossVector),
    /// The first `lossless` modes are untouched, the rest transmit `eta`.
    Partial { lossless: usize, eta: f64 },
}

fn check_probability(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("transmissivity {eta} outside [0, 1]")))
    }
}

impl LossChannelSpec {
    /// Per-mode transmissivities for `modes` modes.
    pub fn transmissivities(&self, modes: usize) -> Result<Vec<f64>> {
        match self {
            LossChannelSpec::Uniform(eta) => {
                check_probability(*eta)?;
                Ok(vec![*eta; modes])
            }
            LossChannelSpec::Nonuniform(v) => {
                if v.len() != modes {
                    return Err(Error::DimensionMismatch(format!(
                        "{}-mode loss vector for {modes} modes",
                        v.len()
                    )));
                }
                Ok(v.as_slice().to_vec())
            }
            LossChannelSpec::Partial { lossless, eta } => {
                check_probability(*eta)?;
                if *lossless > modes {
                    return Err(Error::DimensionMismatch(format!(
                        "{lossless} lossless modes out of {modes}"
                    )));
                }
                Ok((0..modes).map(|i| if i < *lossless { 1.0 } else { *eta }).collect())
            }
        }
    }
}

fn binomial_pmf(n: usize, eta: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    for (k, p) in pmf.iter_mut().enumerate() {
        let c = crate::fock::binomial_exact(n, k).expect("small binomial") as f64;
        *p = c * eta.powi(k as i32) * (1.0 - eta).powi((n - k) as i32);
    }
    pmf
}

/// Exact distribution of the surviving occupations: a product of
/// `Binomial(s_i, eta_i)` laws.
pub fn apply_loss_distribution(input: &OccupationVector, spec: &LossChannelSpec) -> Result<OutcomeDistribution> {
    let eta = spec.transmissivities(input.modes())?;
    let mut dist: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
    for (&s, &e) in input.as_slice().iter().zip(&eta) {
        let pmf = binomial_pmf(s, e);
        dist = dist
            .into_iter()
            .flat_map(|(prefix, p)| {
                pmf.iter().enumerate().filter(|(_, &q)| q > 0.0).map(move |(k, &q)| {
                    let mut v = prefix.clone();
                    v.push(k);
                    (v, p * q)
                })
            })
            .collect();
    }
    dist.into_iter()
        .map(|(v, p)| Ok((OccupationVector::new(v)?, p)))
        .collect()
}

/// One draw of the surviving occupations.
pub fn sample_survivors<R: Rng + ?Sized>(
    input: &OccupationVector,
    spec: &LossChannelSpec,
    rng: &mut R,
) -> Result<OccupationVector> {
    let eta = spec.transmissivities(input.modes())?;
    let survivors = input
        .as_slice()
        .iter()
        .zip(&eta)
        .map(|(&s, &e)| {
            let law = Binomial::new(s as u64, e).map_err(|err| Error::InvalidParameter(err.to_string()))?;
            Ok(law.sample(rng) as usize)
        })
        .collect::<Result<Vec<_>>>()?;
    OccupationVector::new(survivors)
}

/// Total-variation bound `eta^2 (n - k) / 2 + eta (1 - eta) / 2` for `n`
/// photons of which `k` are lossless and the rest see transmissivity `eta`.
/// Values above 1 are returned as computed and carry no information.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvBound {
    pub delta: f64,
    pub leading: f64,
    pub tail: f64,
    /// Transmissivity entering the formula: `eta` itself, or `eta_eff` when
    /// derived from a network.
    pub eta_eff: f64,
    /// `1 / (2 ln(1/eta))` for network bounds.
    pub c_threshold: Option<f64>,
}

impl TvBound {
    /// Whether `c` lies above the threshold past which the bound vanishes
    /// with growing `n`.
    pub fn vanishes_for(&self, c: f64) -> bool {
        self.c_threshold.is_some_and(|t| c > t)
    }
}

pub fn tv_bound(n: usize, k: usize, eta: f64) -> Result<TvBound> {
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    check_probability(eta)?;
    let leading = eta * eta * (n - k) as f64 / 2.0;
    let tail = eta * (1.0 - eta) / 2.0;
    Ok(TvBound { delta: leading + tail, leading, tail, eta_eff: eta, c_threshold: None })
}

/// Bound for a network whose lossy modes have shortest paths of at least
/// `c ln n`: `eta_eff = n^{-c ln(1/eta)}` replaces `eta`.
pub fn tv_bound_network(n: usize, k: usize, eta: f64, c: f64) -> Result<TvBound> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("network bound needs eta in (0, 1), got {eta}")));
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("c = {c} must be nonnegative")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("network bound needs n >= 1".into()));
    }
    let ln_inv = (1.0 / eta).ln();
    let eta_eff = (n as f64).powf(-c * ln_inv);
    let mut bound = tv_bound(n, k, eta_eff)?;
    bound.c_threshold = Some(1.0 / (2.0 * ln_inv));
    Ok(bound)
}
