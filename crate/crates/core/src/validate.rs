//! Invariant batteries run against the oracles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::complexmat::{build_submatrix, permanent_exact, permanent_repeated, SubmatrixSpec, UnitaryMatrix};
use crate::fock::{occupations_with_total, subconfigurations, ModeAssignment, OccupationVector};
use crate::lossy::{apply_loss_distribution, tv_bound, LossChannelSpec};
use crate::network::{build_random, build_reck, extract_losses, shortest_paths};
use crate::oracle::{
    chi_square_test, dilated_lossy_distribution, enumerate_paths, exact_distribution, partial_trace_weights,
    permanent_naive, tv_distance,
};
use crate::sampler::{marginal_pmf, sample_batch};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Permanents,
    Marginals,
    Extraction,
    Sampler,
    Lossy,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Permanents, Suite::Marginals, Suite::Extraction, Suite::Sampler, Suite::Lossy];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permanents" => Ok(Suite::Permanents),
            "marginals" => Ok(Suite::Marginals),
            "extraction" => Ok(Suite::Extraction),
            "sampler" => Ok(Suite::Sampler),
            "lossy" => Ok(Suite::Lossy),
            other => Err(Error::InvalidParameter(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Permanents => "permanents",
            Suite::Marginals => "marginals",
            Suite::Extraction => "extraction",
            Suite::Sampler => "sampler",
            Suite::Lossy => "lossy",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "pass" } else { "FAIL" };
            writeln!(f, "[{tag}] {}: {}", c.name, c.detail)?;
        }
        write!(f, "{}: {}", self.suite, if self.passed() { "pass" } else { "FAIL" })
    }
}

pub fn run(suite: Suite, seed: u64) -> Result<Report> {
    let checks = match suite {
        Suite::Permanents => permanents(seed)?,
        Suite::Marginals => marginals(seed)?,
        Suite::Extraction => extraction(seed)?,
        Suite::Sampler => sampler(seed)?,
        Suite::Lossy => lossy()?,
    };
    Ok(Report { suite, checks })
}

/// Random occupation vector with `n` photons over `m` modes.
pub fn random_occupation<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> OccupationVector {
    let mut v = vec![0; m];
    for _ in 0..n {
        v[rng.random_range(0..m)] += 1;
    }
    OccupationVector::new(v).expect("m >= 1")
}

fn permanents(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_glynn = 0.0f64;
    let mut worst_naive = 0.0f64;
    let cases = 100;
    for _ in 0..cases {
        let m = rng.random_range(2..=6);
        let n = rng.random_range(1..=6);
        let u = UnitaryMatrix::haar_random(m, &mut rng);
        let s = random_occupation(n, m, &mut rng);
        let t = random_occupation(n, m, &mut rng);
        let sub = build_submatrix(&u, &SubmatrixSpec::occupations(s.clone(), t.clone())?)?;
        let repeated = permanent_repeated(&u, &s, &t)?;
        let glynn = permanent_exact(&sub)?;
        let naive = permanent_naive(&sub);
        let scale = naive.norm().max(1e-6);
        worst_glynn = worst_glynn.max((repeated - glynn).norm() / scale);
        worst_naive = worst_naive.max((repeated - naive).norm() / scale);
    }
    let h = UnitaryMatrix::balanced_beam_splitter();
    let ones = OccupationVector::new(vec![1, 1])?;
    let hom = permanent_repeated(&h, &ones, &ones)?.norm();
    let bunched = OccupationVector::new(vec![2, 0])?;
    let half = permanent_repeated(&h, &ones, &bunched)?.norm_sqr() / 2.0;
    Ok(vec![
        Check::new("repeated vs Glynn", worst_glynn < 1e-9, format!("{cases} cases, worst relative error {worst_glynn:.2e}")),
        Check::new("repeated vs permutation sum", worst_naive < 1e-9, format!("{cases} cases, worst relative error {worst_naive:.2e}")),
        Check::new("Hong-Ou-Mandel", hom < 1e-12 && (half - 0.5).abs() < 1e-12, format!("|Per| = {hom:.1e}, p(2,0) = {half}")),
    ])
}

fn marginals(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_chain = 0.0f64;
    let mut prefixes = 0usize;
    for _ in 0..4 {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(1..=3);
        let u = UnitaryMatrix::haar_random(m, &mut rng);
        let s = random_occupation(n, m, &mut rng);
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for prefix in &frontier {
                let parent = if prefix.is_empty() {
                    1.0
                } else {
                    marginal_pmf(&u, &s, &ModeAssignment::new(prefix.clone(), m)?)?
                };
                let mut sum = 0.0;
                for x in 0..m {
                    let mut longer = prefix.clone();
                    longer.push(x);
                    sum += marginal_pmf(&u, &s, &ModeAssignment::new(longer.clone(), m)?)?;
                    next.push(longer);
                }
                worst_chain = worst_chain.max((sum - parent).abs());
                prefixes += 1;
            }
            frontier = next;
        }
    }

    let mut worst_trace = 0.0f64;
    let mut configurations = 0usize;
    for m in 1..=3 {
        for n in 1..=4 {
            for s in occupations_with_total(n, m) {
                for l in 1..=n {
                    let oracle = partial_trace_weights(&s, l)?;
                    for c in subconfigurations(&s, l)? {
                        let w = oracle.weights.get(&c.removed).copied().unwrap_or(0.0);
                        worst_trace = worst_trace.max((w - c.weight).abs());
                    }
                }
                configurations += 1;
            }
        }
    }
    Ok(vec![
        Check::new("chain rule", worst_chain < 1e-10, format!("{prefixes} prefixes, worst deviation {worst_chain:.2e}")),
        Check::new(
            "sub-configuration weights vs partial trace",
            worst_trace < 1e-10,
            format!("{configurations} inputs, worst deviation {worst_trace:.2e}"),
        ),
    ])
}

fn extraction(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let networks = 20;
    for i in 0..networks {
        let m = rng.random_range(2..=4);
        let net = build_random(m, rng.random_range(1..=4), 0.3, seed.wrapping_add(i))?;
        let n = rng.random_range(1..=3);
        let s = random_occupation(n, m, &mut rng);
        let extracted = extract_losses(&net)?.as_network()?;
        let a = dilated_lossy_distribution(&net, &s)?;
        let b = dilated_lossy_distribution(&extracted, &s)?;
        worst = worst.max(tv_distance(&a, &b));
    }
    let mut exponents_ok = true;
    let mut reck_ok = true;
    for m in 2..=8 {
        let net = build_reck(m, 0.9, seed)?;
        let paths = shortest_paths(&net);
        exponents_ok &= extract_losses(&net)?.exponents.as_ref() == Some(&paths);
        for (i, &s) in paths.iter().enumerate() {
            let brute = enumerate_paths(&net, i).iter().map(|p| p.0).min().unwrap_or(0);
            reck_ok &= brute == s;
        }
        reck_ok &= paths[..m - 1].windows(2).all(|w| w[0] < w[1]);
    }
    Ok(vec![
        Check::new("channel equivalence", worst < 1e-9, format!("{networks} networks, worst TV {worst:.2e}")),
        Check::new("uniform exponents equal shortest paths", exponents_ok, "Reck meshes m = 2..8".into()),
        Check::new("Reck path lengths", reck_ok, "increasing from the bottom, equal to exhaustive enumeration".into()),
    ])
}

fn sampler(seed: u64) -> Result<Vec<Check>> {
    let instances = [vec![2, 1, 0, 0], vec![1, 1, 1, 0], vec![3, 1, 0]];
    let mut checks = Vec::new();
    for (i, s) in instances.iter().enumerate() {
        let s = OccupationVector::new(s.clone())?;
        let u = UnitaryMatrix::seeded(s.modes(), seed.wrapping_add(i as u64));
        let exact = exact_distribution(&u, &s)?;
        let batch = sample_batch(&u, &s, 100_000, seed)?;
        let outcomes: Vec<OccupationVector> = batch.outcomes.iter().map(|o| o.outcome.clone()).collect();
        let chi = chi_square_test(&outcomes, exact.entries(), 1e-3)?;
        let worst = batch
            .outcomes
            .iter()
            .map(|o| (o.probability - exact.probability(&o.outcome)).abs() / exact.probability(&o.outcome))
            .fold(0.0, f64::max);
        let within = batch.report.max_evaluations_per_shot as u128 <= batch.report.per_shot_evaluation_bound;
        checks.push(Check::new(
            &format!("sampler {s}"),
            chi.passed && worst < 1e-9 && within,
            format!("chi2 p = {:.3}, probability error {worst:.1e}, evaluations within bound: {within}", chi.p_value),
        ));
    }
    Ok(checks)
}

fn lossy() -> Result<Vec<Check>> {
    let mut worst_binomial = 0.0f64;
    let mut worst_composition = 0.0f64;
    for n in 1..=4 {
        let s = OccupationVector::standard(n, 4)?;
        for eta in [0.1, 0.5, 0.9] {
            let d = apply_loss_distribution(&s, &LossChannelSpec::Uniform(eta))?;
            let mut counts = vec![0.0; n + 1];
            for (t, p) in &d {
                counts[t.photons()] += p;
            }
            for (l, c) in counts.iter().enumerate() {
                let b = crate::fock::binomial_exact(n, l).expect("small") as f64
                    * eta.powi(l as i32)
                    * (1.0 - eta).powi((n - l) as i32);
                worst_binomial = worst_binomial.max((c - b).abs());
            }
            let eta2 = 0.7;
            let direct = apply_loss_distribution(&s, &LossChannelSpec::Uniform(eta * eta2))?;
            let mut sequential = crate::oracle::OutcomeDistribution::new();
            for (t, p) in &d {
                for (t2, q) in apply_loss_distribution(t, &LossChannelSpec::Uniform(eta2))? {
                    *sequential.entry(t2).or_insert(0.0) += p * q;
                }
            }
            worst_composition = worst_composition.max(tv_distance(&direct, &sequential));
        }
    }
    let spot = tv_bound(100, 0, 0.05)?.delta;
    Ok(vec![
        Check::new("binomial survivor law", worst_binomial < 1e-12, format!("worst deviation {worst_binomial:.1e}")),
        Check::new("loss composition", worst_composition < 1e-12, format!("worst TV {worst_composition:.1e}")),
        Check::new("bound spot value", (spot - 0.14875).abs() < 1e-12, format!("delta = {spot}")),
    ])
}
