//! Brute-force ground truth at desk scale.

use std::collections::BTreeMap;

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::complexmat::{repeated_permanent_of, CMatrix, UnitaryMatrix, C64};
use crate::fock::{occupations_with_total, to_occupation, ModeAssignment, OccupationVector};
use crate::network::{Event, LossyNetwork};
use crate::{Error, Result};

/// Probabilities keyed by outcome. Keys absent from the map have probability 0.
pub type OutcomeDistribution = BTreeMap<OccupationVector, f64>;

/// Size limits for the exhaustive paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeskLimits {
    /// Photons for lossless enumeration.
    pub photons: usize,
    /// Modes for lossless enumeration.
    pub modes: usize,
    /// System plus environment modes for the dilation oracle.
    pub dilated_modes: usize,
    /// Photons for the dilation oracle.
    pub dilated_photons: usize,
    /// Entries of a dense first-quantization tensor, `m^n`.
    pub dense_entries: usize,
}

impl Default for DeskLimits {
    fn default() -> Self {
        Self { photons: 6, modes: 8, dilated_modes: 12, dilated_photons: 4, dense_entries: 1024 }
    }
}

/// Environment variable read by [`DeskLimits::from_env`].
pub const DESK_LIMITS_ENV: &str = "LOSSY_BOSON_DESK_LIMITS";

impl DeskLimits {
    /// Parses overrides such as `"photons=8,dilated_modes=40"` on top of the
    /// defaults.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut limits = Self::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("desk limit `{item}` is not key=value")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("desk limit `{item}` is not an integer")))?;
            let slot = match key.trim() {
                "photons" => &mut limits.photons,
                "modes" => &mut limits.modes,
                "dilated_modes" => &mut limits.dilated_modes,
                "dilated_photons" => &mut limits.dilated_photons,
                "dense_entries" => &mut limits.dense_entries,
                other => return Err(Error::InvalidParameter(format!("unknown desk limit `{other}`"))),
            };
            *slot = value;
        }
        Ok(limits)
    }

    /// Defaults, overridden by `LOSSY_BOSON_DESK_LIMITS` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(DESK_LIMITS_ENV) {
            Ok(spec) => Self::parse(&spec),
            Err(_) => Ok(Self::default()),
        }
    }
}

/// Sum over all `n!` permutations.
pub fn permanent_naive(matrix: &CMatrix) -> C64 {
    let n = matrix.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = C64::new(0.0, 0.0);
    let term = |perm: &[usize]| perm.iter().enumerate().map(|(r, &c)| matrix[(r, c)]).product::<C64>();
    total += term(&perm);
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += term(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

/// Outcome distribution with a fixed photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    photons: usize,
    entries: OutcomeDistribution,
}

impl ExactDistribution {
    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn entries(&self) -> &OutcomeDistribution {
        &self.entries
    }

    pub fn into_entries(self) -> OutcomeDistribution {
        self.entries
    }

    pub fn probability(&self, outcome: &OccupationVector) -> f64 {
        self.entries.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Number of outcomes with positive probability.
    pub fn support(&self) -> usize {
        self.entries.values().filter(|&&p| p > 0.0).count()
    }
}

fn transition_probability(matrix: &CMatrix, input: &OccupationVector, output: &OccupationVector) -> f64 {
    let (per, _, _) = repeated_permanent_of(matrix, input.as_slice(), output.as_slice());
    per.norm_sqr() / (input.factorial_product() * output.factorial_product())
}

fn enumerate(matrix: &CMatrix, input: &OccupationVector) -> OutcomeDistribution {
    let outcomes = occupations_with_total(input.photons(), matrix.nrows());
    let probabilities: Vec<f64> = outcomes
        .par_iter()
        .map(|t| transition_probability(matrix, input, t))
        .collect();
    outcomes.into_iter().zip(probabilities).collect()
}

pub fn exact_distribution(unitary: &UnitaryMatrix, input: &OccupationVector) -> Result<ExactDistribution> {
    exact_distribution_with(unitary, input, &DeskLimits::default())
}

/// `p(T) = |Per(U_{S,T})|^2 / (prod s_i! prod t_i!)` for every `T` with `|T| = n`.
pub fn exact_distribution_with(
    unitary: &UnitaryMatrix,
    input: &OccupationVector,
    limits: &DeskLimits,
) -> Result<ExactDistribution> {
    let m = unitary.dim();
    if input.modes() != m {
        return Err(Error::DimensionMismatch(format!(
            "{}-mode input for a {m}-mode unitary",
            input.modes()
        )));
    }
    if input.photons() > limits.photons || m > limits.modes {
        return Err(Error::DeskLimit(format!(
            "exact distribution needs n <= {} and m <= {}, got n = {}, m = {m}",
            limits.photons,
            limits.modes,
            input.photons()
        )));
    }
    Ok(ExactDistribution { photons: input.photons(), entries: enumerate(unitary.matrix(), input) })
}

pub fn dilated_lossy_distribution(net: &LossyNetwork, input: &OccupationVector) -> Result<OutcomeDistribution> {
    dilated_lossy_distribution_with(net, input, &DeskLimits::default())
}

/// Exact output distribution of a lossy network: every loss becomes a beam
/// splitter into its own environment mode, the enlarged unitary is
/// enumerated exhaustively and the environment is summed out.
pub fn dilated_lossy_distribution_with(
    net: &LossyNetwork,
    input: &OccupationVector,
    limits: &DeskLimits,
) -> Result<OutcomeDistribution> {
    let m = net.modes();
    if input.modes() != m {
        return Err(Error::DimensionMismatch(format!("{}-mode input for a {m}-mode network", input.modes())));
    }
    let total = m + net.loss_count();
    if total > limits.dilated_modes || input.photons() > limits.dilated_photons {
        return Err(Error::DeskLimit(format!(
            "dilation needs modes <= {} and n <= {}, got {total} modes and n = {}",
            limits.dilated_modes,
            limits.dilated_photons,
            input.photons()
        )));
    }
    let dilation = net.dilate()?;
    let joint = enumerate(dilation.unitary.matrix(), &input.padded(dilation.environment));
    let mut marginal = OutcomeDistribution::new();
    for (outcome, p) in joint {
        *marginal.entry(outcome.truncated(m)?).or_insert(0.0) += p;
    }
    Ok(marginal)
}

/// Reduced state of the first `l` particles of the symmetrized state `|S>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialTrace {
    /// Diagonal weight of each removed content `K`, i.e. of the remaining
    /// content `S - K` of the kept particles.
    pub weights: BTreeMap<OccupationVector, f64>,
    /// Largest `|rho(a, b)|` between tuples `a`, `b` of different content.
    pub max_off_diagonal: f64,
}

/// Builds `|S>` densely over `[m]^n`, traces out the last `n - l` particles
/// and groups the diagonal of the reduced state by content.
pub fn partial_trace_weights(input: &OccupationVector, l: usize) -> Result<PartialTrace> {
    partial_trace_weights_with(input, l, &DeskLimits::default())
}

pub fn partial_trace_weights_with(
    input: &OccupationVector,
    l: usize,
    limits: &DeskLimits,
) -> Result<PartialTrace> {
    let (n, m) = (input.photons(), input.modes());
    if l == 0 || l > n {
        return Err(Error::InvalidParameter(format!("cannot keep {l} of {n} particles")));
    }
    let dim = m
        .checked_pow(n as u32)
        .filter(|&d| d <= limits.dense_entries)
        .ok_or_else(|| Error::DeskLimit(format!("dense state of {m}^{n} entries exceeds {}", limits.dense_entries)))?;

    let digits = |mut index: usize, len: usize| -> Vec<usize> {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = index % m;
            index /= m;
        }
        out
    };
    let content = |tuple: &[usize]| -> Result<OccupationVector> {
        to_occupation(&ModeAssignment::new(tuple.to_vec(), m)?, m)
    };

    let mut amplitude = vec![0.0f64; dim];
    let mut nonzero = 0usize;
    for (index, a) in amplitude.iter_mut().enumerate() {
        if content(&digits(index, n))? == *input {
            *a = 1.0;
            nonzero += 1;
        }
    }
    let norm = (nonzero as f64).sqrt();
    amplitude.iter_mut().for_each(|a| *a /= norm);

    let kept = m.pow(l as u32);
    let traced = m.pow((n - l) as u32);
    let contents: Vec<OccupationVector> =
        (0..kept).map(|a| content(&digits(a, l))).collect::<Result<_>>()?;
    let mut weights = BTreeMap::new();
    let mut max_off_diagonal = 0.0f64;
    for a in 0..kept {
        for b in 0..kept {
            let rho: f64 = (0..traced)
                .map(|c| amplitude[a * traced + c] * amplitude[b * traced + c])
                .sum();
            if a == b {
                if rho > 0.0 {
                    let removed: Vec<usize> = input
                        .as_slice()
                        .iter()
                        .zip(contents[a].as_slice())
                        .map(|(s, r)| s - r)
                        .collect();
                    *weights.entry(OccupationVector::new(removed)?).or_insert(0.0) += rho;
                }
            } else if contents[a] != contents[b] {
                max_off_diagonal = max_off_diagonal.max(rho.abs());
            }
        }
    }
    Ok(PartialTrace { weights, max_off_diagonal })
}

/// `1/2 sum |p_x - q_x|` over the union of supports.
pub fn tv_distance(p: &OutcomeDistribution, q: &OutcomeDistribution) -> f64 {
    let mut sum = 0.0;
    for (x, &px) in p {
        sum += (px - q.get(x).copied().unwrap_or(0.0)).abs();
    }
    for (x, &qx) in q {
        if !p.contains_key(x) {
            sum += qx.abs();
        }
    }
    0.5 * sum
}

/// Relative frequencies of the observed outcomes.
pub fn empirical_distribution(samples: &[OccupationVector]) -> OutcomeDistribution {
    let mut counts = OutcomeDistribution::new();
    for s in samples {
        *counts.entry(s.clone()).or_insert(0.0) += 1.0;
    }
    let total = samples.len() as f64;
    counts.values_mut().for_each(|c| *c /= total);
    counts
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub passed: bool,
    /// Bins after pooling.
    pub bins: usize,
}

/// Pearson goodness of fit. Bins with expected count below 5 are pooled; an
/// observation outside the expected support fails outright.
pub fn chi_square_test(
    samples: &[OccupationVector],
    expected: &OutcomeDistribution,
    significance: f64,
) -> Result<ChiSquareResult> {
    let support: Vec<(&OccupationVector, f64)> =
        expected.iter().filter(|(_, &p)| p > 0.0).map(|(k, &p)| (k, p)).collect();
    let n = samples.len();
    if n < 10 * support.len() {
        return Err(Error::InvalidParameter(format!(
            "{n} samples for a support of {} outcomes; need at least ten per outcome",
            support.len()
        )));
    }
    let mut observed: BTreeMap<&OccupationVector, usize> = BTreeMap::new();
    for s in samples {
        *observed.entry(s).or_insert(0) += 1;
    }
    if observed.keys().any(|k| expected.get(*k).is_none_or(|&p| p <= 0.0)) {
        return Ok(ChiSquareResult {
            statistic: f64::INFINITY,
            degrees_of_freedom: support.len().saturating_sub(1),
            p_value: 0.0,
            passed: false,
            bins: support.len(),
        });
    }

    let total_mass: f64 = support.iter().map(|(_, p)| p).sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (outcome, p) in &support {
        let e = n as f64 * p / total_mass;
        let o = observed.get(outcome).copied().unwrap_or(0) as f64;
        if e < 5.0 {
            pooled.0 += e;
            pooled.1 += o;
        } else {
            bins.push((e, o));
        }
    }
    if pooled.0 > 0.0 {
        if pooled.0 >= 5.0 || bins.is_empty() {
            bins.push(pooled);
        } else {
            let smallest = bins
                .iter_mut()
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("bins is non-empty");
            smallest.0 += pooled.0;
            smallest.1 += pooled.1;
        }
    }
    if bins.len() < 2 {
        return Ok(ChiSquareResult { statistic: 0.0, degrees_of_freedom: 0, p_value: 1.0, passed: true, bins: bins.len() });
    }
    let statistic: f64 = bins.iter().map(|(e, o)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let law = ChiSquared::new(dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    let p_value = law.sf(statistic);
    Ok(ChiSquareResult { statistic, degrees_of_freedom: dof, p_value, passed: p_value >= significance, bins: bins.len() })
}

/// Every path from `input` through the schedule, as (elements crossed,
/// product of traversed transmissivities).
pub fn enumerate_paths(net: &LossyNetwork, input: usize) -> Vec<(usize, f64)> {
    fn walk(events: &[Event<'_>], mode: usize, crossed: usize, product: f64, out: &mut Vec<(usize, f64)>) {
        for (k, event) in events.iter().enumerate() {
            match event {
                Event::Loss(l) if l.mode == mode => {
                    return walk(&events[k + 1..], mode, crossed, product * l.eta, out);
                }
                Event::Element(e) if e.touches(mode) => {
                    let arm = if e.modes.0 == mode { e.eta.0 } else { e.eta.1 };
                    for next in [e.modes.0, e.modes.1] {
                        walk(&events[k + 1..], next, crossed + 1, product * arm, out);
                    }
                    return;
                }
                _ => {}
            }
        }
        out.push((crossed, product));
    }
    let events = net.schedule();
    let mut out = Vec::new();
    walk(&events, input, 0, 1.0, &mut out);
    out
}

/// Distributions as a JSON object from `"[t_1,...,t_m]"` to probability.
pub fn distribution_to_json(dist: &OutcomeDistribution) -> String {
    let map: BTreeMap<String, f64> = dist.iter().map(|(k, &v)| (k.to_string(), v)).collect();
    serde_json::to_string_pretty(&map).expect("distribution serialization cannot fail")
}

pub fn distribution_from_json(text: &str) -> Result<OutcomeDistribution> {
    let map: BTreeMap<String, f64> =
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    map.into_iter()
        .map(|(k, v)| {
            let occ: OccupationVector =
                serde_json::from_str(&k).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok((occ, v))
        })
        .collect()
}
