//! Sequential sampler for arbitrary Fock inputs.
//!
//! Photons are treated as distinguishable labels `r_1, ..., r_n` and drawn one
//! at a time from the chain rule `p(r_1) p(r_2 | r_1) ...`. The marginal of a
//! prefix of length `l` is a mixture over the ways of removing `n - l` photons
//! from the input,
//!
//! `p(r_1..r_l) = sum_K w(K) |Per(U_{S-K, r})|^2 / (l! prod (s_i - K_i)!)`,
//!
//! so each step costs `m` candidates times `N_l(S)` permanents of `l x l`
//! matrices with repeated columns.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complexmat::{product_plus_one, repeated_permanent_of, support_size, CMatrix, UnitaryMatrix};
use crate::fock::{factorial, subconfigurations, to_occupation, ModeAssignment, OccupationVector, SubConfiguration};
use crate::{Error, Result};

/// Weights down to this value are treated as roundoff and clamped to zero.
pub const NEGATIVE_WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    pub outcome: OccupationVector,
    /// `p_U(S -> T)` of the sampled outcome.
    pub probability: f64,
    /// The drawn tuple `r`, in draw order.
    pub prefix: ModeAssignment,
    pub permanent_evaluations: u64,
    /// Terms of the permanent expansions summed for this sample.
    pub expansion_terms: u64,
    /// Complex multiply-adds spent inside the permanent expansions.
    pub operations: u64,
}

fn check_dims(unitary: &UnitaryMatrix, input: &OccupationVector) -> Result<()> {
    if unitary.dim() != input.modes() {
        return Err(Error::DimensionMismatch(format!(
            "{}-mode input for a {}-mode unitary",
            input.modes(),
            unitary.dim()
        )));
    }
    Ok(())
}

fn prefix_occupation(prefix: &[usize], modes: usize) -> Vec<usize> {
    let mut t = vec![0; modes];
    for &x in prefix {
        t[x] += 1;
    }
    t
}

#[derive(Default)]
struct Counters {
    evaluations: u64,
    terms: u64,
    operations: u64,
}

/// `p(r_1..r_l)` for a prefix given as its occupation `t` with `|t| = l`.
fn marginal_of(
    matrix: &CMatrix,
    subconfigs: &[SubConfiguration],
    t: &[usize],
    l: usize,
    counters: &mut Counters,
) -> f64 {
    let l_factorial = factorial(l);
    subconfigs
        .iter()
        .map(|c| {
            let (per, terms, ops) = repeated_permanent_of(matrix, c.remaining.as_slice(), t);
            counters.evaluations += 1;
            counters.terms += terms;
            counters.operations += ops;
            c.weight * per.norm_sqr() / (l_factorial * c.remaining.factorial_product())
        })
        .sum()
}

/// Marginal probability of the first `l` labels taking the values in
/// `prefix`, for `1 <= l <= n`.
pub fn marginal_pmf(unitary: &UnitaryMatrix, input: &OccupationVector, prefix: &ModeAssignment) -> Result<f64> {
    check_dims(unitary, input)?;
    let m = unitary.dim();
    if let Some(&bad) = prefix.entries().iter().find(|&&x| x >= m) {
        return Err(Error::ModeOutOfRange { mode: bad + 1, modes: m });
    }
    let l = prefix.len();
    let subconfigs = subconfigurations(input, l)?;
    let t = prefix_occupation(prefix.entries(), m);
    Ok(marginal_of(unitary.matrix(), &subconfigs, &t, l, &mut Counters::default()))
}

/// Inverse-CDF draw from unnormalized weights with a single uniform.
fn categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut total = 0.0;
    for &w in weights {
        if w.is_nan() || w < -NEGATIVE_WEIGHT_TOLERANCE {
            return Err(Error::Numerical(format!("marginal weight {w} is negative")));
        }
        total += w.max(0.0);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::Numerical("all candidate weights vanish".into()));
    }
    let u = rng.random::<f64>() * total;
    let index = cumulative.partition_point(|&c| c <= u);
    Ok(index.min(weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)))
}

/// A unitary and input with the sub-configurations of every step
/// precomputed, for drawing many samples.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    unitary: &'a UnitaryMatrix,
    input: &'a OccupationVector,
    steps: Vec<Vec<SubConfiguration>>,
}

impl<'a> Sampler<'a> {
    pub fn new(unitary: &'a UnitaryMatrix, input: &'a OccupationVector) -> Result<Self> {
        check_dims(unitary, input)?;
        let steps = (1..=input.photons())
            .map(|l| subconfigurations(input, l))
            .collect::<Result<_>>()?;
        Ok(Self { unitary, input, steps })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SampleOutcome> {
        let (n, m) = (self.input.photons(), self.unitary.dim());
        let matrix = self.unitary.matrix();
        let mut counters = Counters::default();
        let mut prefix: Vec<usize> = Vec::with_capacity(n);
        let mut t = vec![0usize; m];
        let mut weights = vec![0.0; m];
        let mut last = 1.0;
        for (l, subconfigs) in (1..=n).zip(&self.steps) {
            for (x, w) in weights.iter_mut().enumerate() {
                t[x] += 1;
                *w = marginal_of(matrix, subconfigs, &t, l, &mut counters);
                t[x] -= 1;
            }
            let x = categorical(&weights, rng)?;
            last = weights[x].max(0.0);
            prefix.push(x);
            t[x] += 1;
        }
        let prefix = ModeAssignment::new(prefix, m)?;
        let outcome = to_occupation(&prefix, m)?;
        let orderings = factorial(n) / outcome.factorial_product();
        Ok(SampleOutcome {
            probability: last * orderings,
            outcome,
            prefix,
            permanent_evaluations: counters.evaluations,
            expansion_terms: counters.terms,
            operations: counters.operations,
        })
    }
}

/// Draws one outcome of `input` sent through `unitary`.
pub fn sample<R: Rng + ?Sized>(unitary: &UnitaryMatrix, input: &OccupationVector, rng: &mut R) -> Result<SampleOutcome> {
    Sampler::new(unitary, input)?.draw(rng)
}

/// Random stream of shot `shot` in a batch seeded with `seed`.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Instrumentation of a batch, next to the bounds it is checked against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplerReport {
    pub alpha_s: usize,
    pub expansion_terms: u64,
    /// Largest permanent-evaluation count of a single shot.
    pub max_evaluations_per_shot: u64,
    pub modes: usize,
    pub operations: u64,
    /// `m (prod(s_i + 1) - 1)`.
    pub per_shot_evaluation_bound: u128,
    pub permanent_evaluations: u64,
    pub photons: usize,
    /// `n m prod(s_i + 1)^2 alpha_S`.
    pub runtime_bound: u128,
    pub shots: usize,
}

impl SamplerReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// `m (prod(s_i + 1) - 1)`, the permanent evaluations of one shot.
pub fn evaluation_bound(input: &OccupationVector) -> u128 {
    (input.modes() as u128).saturating_mul(product_plus_one(input.as_slice()) - 1)
}

/// `n m prod(s_i + 1)^2 alpha_S`.
pub fn runtime_bound(input: &OccupationVector) -> u128 {
    let p = product_plus_one(input.as_slice());
    (input.photons() as u128)
        .saturating_mul(input.modes() as u128)
        .saturating_mul(p.saturating_mul(p))
        .saturating_mul(support_size(input.as_slice()) as u128)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub outcomes: Vec<SampleOutcome>,
    pub report: SamplerReport,
}

/// `shots` independent samples; shot `i` uses [`shot_rng`]`(seed, i)`.
pub fn sample_batch(unitary: &UnitaryMatrix, input: &OccupationVector, shots: usize, seed: u64) -> Result<Batch> {
    if shots == 0 {
        return Err(Error::InvalidParameter("a batch needs at least one shot".into()));
    }
    let sampler = Sampler::new(unitary, input)?;
    let outcomes = (0..shots as u64)
        .into_par_iter()
        .map(|shot| sampler.draw(&mut shot_rng(seed, shot)))
        .collect::<Result<Vec<_>>>()?;
    let report = SamplerReport {
        alpha_s: support_size(input.as_slice()),
        expansion_terms: outcomes.iter().map(|o| o.expansion_terms).sum(),
        max_evaluations_per_shot: outcomes.iter().map(|o| o.permanent_evaluations).max().unwrap_or(0),
        modes: unitary.dim(),
        operations: outcomes.iter().map(|o| o.operations).sum(),
        per_shot_evaluation_bound: evaluation_bound(input),
        permanent_evaluations: outcomes.iter().map(|o| o.permanent_evaluations).sum(),
        photons: input.photons(),
        runtime_bound: runtime_bound(input),
        shots,
    };
    Ok(Batch { outcomes, report })
}

/// CSV with columns `shot_index,outcome,probability`; occupations are
/// semicolon-joined.
pub fn write_csv<W: Write>(outcomes: &[SampleOutcome], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "shot_index,outcome,probability")?;
    for (i, o) in outcomes.iter().enumerate() {
        let cells: Vec<String> = o.outcome.as_slice().iter().map(usize::to_string).collect();
        writeln!(out, "{i},{},{:?}", cells.join(";"), o.probability)?;
    }
    Ok(())
}
