//! Fock-state bookkeeping in second quantization (occupation vectors) and
//! first quantization (mode assignment tuples), plus the combinatorics of
//! removing photons from a configuration.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Photon counts `(s_1, ..., s_m)` over `m >= 1` modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector {
    occupations: Vec<usize>,
    photons: usize,
}

impl OccupationVector {
    pub fn new(occupations: Vec<usize>) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::InvalidParameter(
                "an occupation vector needs at least one mode".into(),
            ));
        }
        let photons = occupations.iter().sum();
        Ok(Self { occupations, photons })
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        Self::new(vec![0; modes])
    }

    /// `(1, ..., 1, 0, ..., 0)` with `photons` leading ones.
    pub fn standard(photons: usize, modes: usize) -> Result<Self> {
        if photons > modes {
            return Err(Error::InvalidParameter(format!(
                "cannot place {photons} single photons in {modes} modes"
            )));
        }
        let mut v = vec![0; modes];
        v[..photons].iter_mut().for_each(|x| *x = 1);
        Self::new(v)
    }

    pub fn modes(&self) -> usize {
        self.occupations.len()
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.occupations
    }

    pub fn get(&self, mode: usize) -> usize {
        self.occupations[mode]
    }

    /// Number of occupied modes.
    pub fn support(&self) -> usize {
        self.occupations.iter().filter(|&&s| s > 0).count()
    }

    /// Whether the state is `(1, ..., 1, 0, ..., 0)`.
    pub fn is_standard(&self) -> bool {
        let n = self.photons;
        n <= self.modes()
            && self.occupations[..n].iter().all(|&s| s == 1)
            && self.occupations[n..].iter().all(|&s| s == 0)
    }

    /// `prod_i s_i!` as a float.
    pub fn factorial_product(&self) -> f64 {
        self.occupations.iter().map(|&s| factorial(s)).product()
    }

    /// Leading `modes` entries. Photons outside them are dropped.
    pub fn truncated(&self, modes: usize) -> Result<Self> {
        Self::new(self.occupations[..modes.min(self.modes())].to_vec())
    }

    /// Appends `extra` empty modes.
    pub fn padded(&self, extra: usize) -> Self {
        let mut v = self.occupations.clone();
        v.extend(std::iter::repeat(0).take(extra));
        Self { occupations: v, photons: self.photons }
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.occupations
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for OccupationVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.occupations.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OccupationVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        OccupationVector::new(v).map_err(serde::de::Error::custom)
    }
}

/// Per-photon mode labels. Stored 0-based; serialized 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeAssignment {
    entries: Vec<usize>,
    ordered: bool,
}

impl ModeAssignment {
    /// Raw tuple `r` of 0-based modes, each below `modes`.
    pub fn new(entries: Vec<usize>, modes: usize) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&x| x >= modes) {
            return Err(Error::ModeOutOfRange { mode: bad + 1, modes });
        }
        Ok(Self::unchecked(entries))
    }

    /// Raw tuple of 1-based modes in `1..=modes`.
    pub fn from_one_based(entries: Vec<usize>, modes: usize) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&x| x == 0 || x > modes) {
            return Err(Error::ModeOutOfRange { mode: bad, modes });
        }
        Ok(Self::unchecked(entries.into_iter().map(|x| x - 1).collect()))
    }

    pub(crate) fn unchecked(entries: Vec<usize>) -> Self {
        Self { entries, ordered: false }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether this is the nondecreasing multiset form `z`.
    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    /// Nondecreasing rewrite `z` of the tuple.
    pub fn sorted(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.sort_unstable();
        Self { entries, ordered: true }
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.entries.iter().map(|x| x + 1).collect()
    }
}

impl Serialize for ModeAssignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModeAssignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        if v.contains(&0) {
            return Err(serde::de::Error::custom("mode assignments are 1-based"));
        }
        let ordered = v.windows(2).all(|w| w[0] <= w[1]);
        Ok(Self { entries: v.into_iter().map(|x| x - 1).collect(), ordered })
    }
}

/// Nondecreasing tuple in which mode `i` appears `t_i` times.
pub fn to_assignment(occupation: &OccupationVector) -> ModeAssignment {
    ModeAssignment {
        entries: crate::complexmat::repeated_indices(occupation.as_slice()),
        ordered: true,
    }
}

/// Multiplicities of an assignment over `modes` modes.
pub fn to_occupation(assignment: &ModeAssignment, modes: usize) -> Result<OccupationVector> {
    let mut counts = vec![0; modes];
    for &x in assignment.entries() {
        if x >= modes {
            return Err(Error::ModeOutOfRange { mode: x + 1, modes });
        }
        counts[x] += 1;
    }
    OccupationVector::new(counts)
}

/// One way of removing `n - l` photons from `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubConfiguration {
    /// `K`, the removed photons.
    pub removed: OccupationVector,
    /// `S - K`.
    pub remaining: OccupationVector,
    /// Probability of `S - K` in the reduced state of the first `l` photons.
    pub weight: f64,
}

/// All `K <= S` with `|K| = n - l`, weighted by the multivariate
/// hypergeometric law `prod_i C(s_i, K_i) / C(n, n - l)`.
///
/// Entries are ordered lexicographically by the remaining configuration
/// `S - K`.
pub fn subconfigurations(state: &OccupationVector, l: usize) -> Result<Vec<SubConfiguration>> {
    let n = state.photons();
    if l == 0 || l > n {
        return Err(Error::InvalidParameter(format!(
            "sub-configuration size {l} outside 1..={n}"
        )));
    }
    let s = state.as_slice();
    let total = Binomial::of(n, n - l);
    let mut out = Vec::new();
    for remaining in bounded_compositions(l, s) {
        let removed: Vec<usize> = s.iter().zip(&remaining).map(|(a, b)| a - b).collect();
        let numerator = removed
            .iter()
            .zip(s)
            .fold(Binomial::one(), |acc, (&k, &si)| acc.times(Binomial::of(si, k)));
        out.push(SubConfiguration {
            weight: numerator.ratio(total),
            removed: OccupationVector::new(removed)?,
            remaining: OccupationVector::new(remaining)?,
        });
    }
    Ok(out)
}

/// `N_l(S)` for `l = 1..=n`: how many `l`-photon configurations arise from
/// removing photons from `S`. Index `l - 1` holds `N_l`.
pub fn count_subconfigurations(state: &OccupationVector) -> Vec<u128> {
    // Coefficients of prod_i (1 + x + ... + x^{s_i}).
    let n = state.photons();
    let mut poly = vec![0u128; n + 1];
    poly[0] = 1;
    let mut degree = 0;
    for &s in state.as_slice() {
        let mut next = vec![0u128; n + 1];
        for (d, &c) in poly.iter().enumerate().take(degree + 1) {
            if c == 0 {
                continue;
            }
            for k in 0..=s {
                next[d + k] = next[d + k].saturating_add(c);
            }
        }
        poly = next;
        degree += s;
    }
    (1..=n).map(|l| poly[l]).collect()
}

/// Lexicographically ordered vectors `x` with `sum x = total`, `x <= bound`.
pub(crate) fn bounded_compositions(total: usize, bound: &[usize]) -> Vec<Vec<usize>> {
    fn rec(pos: usize, left: usize, bound: &[usize], suffix_cap: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == bound.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let min = left.saturating_sub(suffix_cap[pos + 1]);
        let max = bound[pos].min(left);
        for x in min..=max {
            cur.push(x);
            rec(pos + 1, left - x, bound, suffix_cap, cur, out);
            cur.pop();
        }
    }
    let mut suffix_cap = vec![0usize; bound.len() + 1];
    for i in (0..bound.len()).rev() {
        suffix_cap[i] = suffix_cap[i + 1].saturating_add(bound[i]);
    }
    let mut out = Vec::new();
    if suffix_cap[0] >= total {
        rec(0, total, bound, &suffix_cap, &mut Vec::with_capacity(bound.len()), &mut out);
    }
    out
}

/// Every occupation vector with `photons` photons over `modes` modes, in
/// lexicographic order.
pub fn occupations_with_total(photons: usize, modes: usize) -> Vec<OccupationVector> {
    bounded_compositions(photons, &vec![photons; modes])
        .into_iter()
        .map(|v| OccupationVector { photons, occupations: v })
        .collect()
}

/// `n! / prod parts_i!`, exact. Overflow beyond `u64` is reported so the
/// caller can switch to [`ln_multinomial`].
pub fn multinomial(n: usize, parts: &[usize]) -> Result<u64> {
    if parts.iter().sum::<usize>() != n {
        return Err(Error::InvalidParameter(format!("parts of multinomial do not sum to {n}")));
    }
    let mut acc: u128 = 1;
    let mut used = 0usize;
    for &p in parts {
        used += p;
        let b = binomial_exact(used, p).ok_or(Error::Overflow("multinomial coefficient"))?;
        acc = acc.checked_mul(b).ok_or(Error::Overflow("multinomial coefficient"))?;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("multinomial coefficient"))
}

/// Natural log of the multinomial coefficient `(sum parts)! / prod parts_i!`.
pub fn ln_multinomial(parts: &[usize]) -> f64 {
    let n: usize = parts.iter().sum();
    ln_factorial(n) - parts.iter().map(|&p| ln_factorial(p)).sum::<f64>()
}

/// `n! / prod parts_i!` as a float, exact when it fits in 64 bits.
pub fn multinomial_f64(parts: &[usize]) -> f64 {
    let n = parts.iter().sum();
    match multinomial(n, parts) {
        Ok(v) => v as f64,
        Err(_) => ln_multinomial(parts).exp(),
    }
}

pub(crate) fn binomial_exact(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    statrs::function::factorial::ln_factorial(n as u64)
}

pub(crate) fn factorial(n: usize) -> f64 {
    statrs::function::factorial::factorial(n as u64)
}

/// Binomial coefficient kept exact while it fits, log-valued afterwards.
#[derive(Clone, Copy, Debug)]
enum Binomial {
    Exact(u128),
    Ln(f64),
}

impl Binomial {
    fn one() -> Self {
        Binomial::Exact(1)
    }

    fn of(n: usize, k: usize) -> Self {
        match binomial_exact(n, k) {
            Some(v) => Binomial::Exact(v),
            None => Binomial::Ln(ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)),
        }
    }

    fn ln(self) -> f64 {
        match self {
            Binomial::Exact(v) => (v as f64).ln(),
            Binomial::Ln(x) => x,
        }
    }

    fn times(self, other: Self) -> Self {
        match (self, other) {
            (Binomial::Exact(a), Binomial::Exact(b)) => match a.checked_mul(b) {
                Some(v) => Binomial::Exact(v),
                None => Binomial::Ln(self.ln() + other.ln()),
            },
            _ => Binomial::Ln(self.ln() + other.ln()),
        }
    }

    fn ratio(self, den: Self) -> f64 {
        match (self, den) {
            (Binomial::Exact(a), Binomial::Exact(b)) => a as f64 / b as f64,
            _ => (self.ln() - den.ln()).exp(),
        }
    }
}

/// Input families with efficient sampling cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputClass {
    /// At most `k` occupied bins.
    A,
    /// One multiply-occupied bin plus at most `c ln n` single photons.
    B,
    /// At most `k` multiply-occupied bins plus at most `c ln n` singles.
    C,
    General,
}

impl fmt::Display for InputClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InputClass::A => "A",
            InputClass::B => "B",
            InputClass::C => "C",
            InputClass::General => "general",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassificationParams {
    /// Bin budget `k` for type A (and the A part of type C).
    pub bins: usize,
    /// Constant `c` in the `c ln n` single-photon budget.
    pub c: f64,
}

impl Default for ClassificationParams {
    fn default() -> Self {
        Self { bins: 2, c: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub class: InputClass,
    /// `k m n (n+1)^{2k}` for A, `c m n^{2c+3} ln n` for B, and the generic
    /// `n m prod(s_j+1)^2 alpha_S` otherwise.
    pub predicted_cost: f64,
}

pub fn classify_input(state: &OccupationVector, c: f64) -> Classification {
    classify_input_with(state, &ClassificationParams { c, ..Default::default() })
}

pub fn classify_input_with(state: &OccupationVector, params: &ClassificationParams) -> Classification {
    let s = state.as_slice();
    let n = state.photons() as f64;
    let m = state.modes() as f64;
    let alpha = state.support();
    let multi = s.iter().filter(|&&x| x > 1).count();
    let singles = s.iter().filter(|&&x| x == 1).count();
    let ln_n = if n > 0.0 { n.ln() } else { 0.0 };
    let single_budget = params.c * ln_n;

    if alpha <= params.bins {
        let k = params.bins as f64;
        return Classification {
            class: InputClass::A,
            predicted_cost: k * m * n * (n + 1.0).powf(2.0 * k),
        };
    }
    if multi == 1 && singles as f64 <= single_budget {
        return Classification {
            class: InputClass::B,
            predicted_cost: params.c * m * n.powf(2.0 * params.c + 3.0) * ln_n,
        };
    }
    let generic = n * m * s.iter().map(|&x| ((x + 1) as f64).powi(2)).product::<f64>() * alpha as f64;
    let class = if multi <= params.bins && singles as f64 <= single_budget {
        InputClass::C
    } else {
        InputClass::General
    };
    Classification { class, predicted_cost: generic }
}
