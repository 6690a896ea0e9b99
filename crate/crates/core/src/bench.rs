//! Operation-count sweeps of the sampler over the input classes, next to the
//! predicted costs.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::complexmat::UnitaryMatrix;
use crate::fock::{classify_input, OccupationVector};
use crate::sampler::{evaluation_bound, runtime_bound, sample_batch};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BenchClass {
    /// Two bins, `m = 4`.
    A,
    /// One bin plus `floor(ln n)` single photons, `m = 6`.
    B,
    /// Two bins plus `floor(ln n)` single photons, `m = 6`.
    C,
    /// `n` single photons, `m = max(10, n)`.
    General,
}

impl FromStr for BenchClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(BenchClass::A),
            "b" => Ok(BenchClass::B),
            "c" => Ok(BenchClass::C),
            "general" => Ok(BenchClass::General),
            other => Err(Error::InvalidParameter(format!("unknown input class `{other}`"))),
        }
    }
}

impl fmt::Display for BenchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BenchClass::A => "A",
            BenchClass::B => "B",
            BenchClass::C => "C",
            BenchClass::General => "general",
        };
        f.write_str(s)
    }
}

impl BenchClass {
    /// Exponent of `n` in the polynomial cost prediction, where there is one.
    pub fn predicted_exponent(self) -> Option<f64> {
        match self {
            BenchClass::A => Some(5.0),
            BenchClass::B => Some(5.0),
            BenchClass::C | BenchClass::General => None,
        }
    }
}

fn singles_for(n: usize) -> usize {
    ((n as f64).ln().floor() as usize).min(n.saturating_sub(1))
}

/// The benchmark input of `class` with `n` photons.
pub fn bench_input(class: BenchClass, n: usize) -> Result<OccupationVector> {
    if n == 0 {
        return Err(Error::InvalidParameter("benchmarks need n >= 1".into()));
    }
    let v = match class {
        BenchClass::A => vec![n.div_ceil(2), n / 2, 0, 0],
        BenchClass::B => {
            let singles = singles_for(n);
            let mut v = vec![0; 6.max(singles + 2)];
            v[0] = n - singles;
            v[1..=singles].iter_mut().for_each(|x| *x = 1);
            v
        }
        BenchClass::C => {
            let singles = singles_for(n).min(n.saturating_sub(2));
            let binned = n - singles;
            let mut v = vec![0; 6.max(singles + 3)];
            v[0] = binned.div_ceil(2);
            v[1] = binned / 2;
            v[2..2 + singles].iter_mut().for_each(|x| *x = 1);
            v
        }
        BenchClass::General => {
            let mut v = vec![0; n.max(10)];
            v[..n].iter_mut().for_each(|x| *x = 1);
            v
        }
    };
    OccupationVector::new(v)
}

/// Closed-form cost prediction used in the table: `k m n (n+1)^{2k}` with
/// `k = 2` for class A, `c m n^{2c+3} ln n` with `c = 1` for class B, and
/// `n m prod(s_i+1)^2 alpha_S` otherwise.
pub fn predicted_cost(class: BenchClass, input: &OccupationVector) -> f64 {
    let n = input.photons() as f64;
    let m = input.modes() as f64;
    match class {
        BenchClass::A => 2.0 * m * n * (n + 1.0).powi(4),
        BenchClass::B => m * n.powi(5) * n.ln(),
        BenchClass::C | BenchClass::General => runtime_bound(input) as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub class: BenchClass,
    pub n: usize,
    pub m: usize,
    pub input: String,
    /// Label assigned by the classifier with `c = 1`, `k = 2`.
    pub classified: String,
    pub evaluations_per_shot: f64,
    pub terms_per_shot: f64,
    pub operations_per_shot: f64,
    /// `m (prod(s_i + 1) - 1)`.
    pub evaluation_bound: u128,
    pub predicted: f64,
    pub seconds_per_shot: f64,
}

/// Samples `shots` outcomes for every size through a seeded Haar unitary
/// and records the instrumentation averages.
pub fn run_bench(class: BenchClass, sizes: &[usize], shots: usize, seed: u64) -> Result<Vec<BenchRow>> {
    sizes
        .iter()
        .map(|&n| {
            let input = bench_input(class, n)?;
            let m = input.modes();
            let u = UnitaryMatrix::seeded(m, seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let start = Instant::now();
            let batch = sample_batch(&u, &input, shots, seed)?;
            let elapsed = start.elapsed().as_secs_f64();
            let per = |x: u64| x as f64 / shots as f64;
            Ok(BenchRow {
                class,
                n,
                m,
                input: input.to_string(),
                classified: classify_input(&input, 1.0).class.to_string(),
                evaluations_per_shot: per(batch.report.permanent_evaluations),
                terms_per_shot: per(batch.report.expansion_terms),
                operations_per_shot: per(batch.report.operations),
                evaluation_bound: evaluation_bound(&input),
                predicted: predicted_cost(class, &input),
                seconds_per_shot: elapsed / shots as f64,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "class,n,m,input,classified,evaluations_per_shot,terms_per_shot,operations_per_shot,evaluation_bound,predicted,seconds_per_shot"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:?},{:?},{:?},{},{:?},{:?}",
            r.class,
            r.n,
            r.m,
            r.input.replace(',', ";"),
            r.classified,
            r.evaluations_per_shot,
            r.terms_per_shot,
            r.operations_per_shot,
            r.evaluation_bound,
            r.predicted,
            r.seconds_per_shot
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_have_the_requested_shape() {
        assert_eq!(bench_input(BenchClass::A, 7).unwrap().as_slice(), &[4, 3, 0, 0]);
        assert_eq!(bench_input(BenchClass::B, 10).unwrap().as_slice(), &[8, 1, 1, 0, 0, 0]);
        assert_eq!(bench_input(BenchClass::C, 10).unwrap().as_slice(), &[4, 4, 1, 1, 0, 0]);
        assert_eq!(bench_input(BenchClass::General, 4).unwrap().photons(), 4);
        for n in 2..40 {
            for class in [BenchClass::A, BenchClass::B, BenchClass::C, BenchClass::General] {
                assert_eq!(bench_input(class, n).unwrap().photons(), n);
            }
        }
    }

    #[test]
    fn counts_never_exceed_the_bound() {
        let rows = run_bench(BenchClass::A, &[4, 6], 3, 1).unwrap();
        for r in rows {
            assert_eq!(r.evaluations_per_shot, r.evaluation_bound as f64);
        }
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, 3.0 * (x as f64).powi(3))).collect();
        assert!((loglog_slope(&pts) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn class_names_parse() {
        assert_eq!("general".parse::<BenchClass>().unwrap(), BenchClass::General);
        assert_eq!("b".parse::<BenchClass>().unwrap(), BenchClass::B);
        assert!("d".parse::<BenchClass>().is_err());
    }
}
