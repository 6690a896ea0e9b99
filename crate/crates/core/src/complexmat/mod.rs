//! Dense complex matrices, submatrix construction and permanents.
//!
//! Transition amplitudes of an `n`-photon Fock state through an `m`-mode
//! interferometer `U` are permanents of `n x n` matrices built by repeating
//! columns of `U` according to the input occupations and rows according to
//! the output occupations. Column `i` of `U` is the image of input mode `i`.

mod permanent;
mod sum;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::fock::{ModeAssignment, OccupationVector};
use crate::{Error, Result};

pub use permanent::{
    permanent_exact, permanent_exact_counted, permanent_exact_with_limit, permanent_repeated,
    permanent_repeated_counted, DEFAULT_PERMANENT_LIMIT,
};
pub(crate) use permanent::repeated_permanent_of;
pub(crate) use sum::PairwiseSum;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Maximum tolerated `max |U^dagger U - I|` for a matrix to count as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Max-norm of `U^dagger U - I`. Non-square input returns infinity.
pub fn unitarity_deviation(matrix: &CMatrix) -> f64 {
    if !matrix.is_square() {
        return f64::INFINITY;
    }
    let gram = matrix.adjoint() * matrix;
    let mut worst = 0.0f64;
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            let target = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((gram[(r, c)] - target).norm());
        }
    }
    worst
}

/// An `m x m` unitary mode transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    /// Wraps `matrix` after checking unitarity. Nothing is renormalized.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() == 0 || !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "unitary must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation < UNITARITY_TOLERANCE) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(matrix))
    }

    pub fn identity(modes: usize) -> Self {
        Self(CMatrix::identity(modes, modes))
    }

    /// Haar-distributed unitary: QR of a complex Ginibre matrix with the
    /// phases of `R`'s diagonal folded back into `Q`.
    pub fn haar_random<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Self {
        let ginibre = CMatrix::from_fn(modes, modes, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) / std::f64::consts::SQRT_2
        });
        let qr = ginibre.qr();
        let mut q = qr.q();
        let r = qr.r();
        for c in 0..modes {
            let d = r[(c, c)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
            for row in 0..modes {
                q[(row, c)] *= phase;
            }
        }
        Self(q)
    }

    /// Haar-random unitary drawn from a ChaCha stream seeded with `seed`.
    pub fn seeded(modes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::haar_random(modes, &mut rng)
    }

    /// The balanced two-mode splitter `[[1, -1], [1, 1]] / sqrt(2)`.
    pub fn balanced_beam_splitter() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self(CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0)],
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Matrix product `self * rhs`, i.e. `rhs` acts first.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}-mode and {}-mode unitaries",
                self.dim(),
                rhs.dim()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryFile {
    imag: Vec<Vec<f64>>,
    real: Vec<Vec<f64>>,
}

impl UnitaryMatrix {
    /// `{"imag": [[...]], "real": [[...]]}`, row by row.
    pub fn to_json(&self) -> String {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            self.0.row_iter().map(|r| r.iter().map(f).collect()).collect()
        };
        let file = UnitaryFile { imag: rows(|z| z.im), real: rows(|z| z.re) };
        serde_json::to_string_pretty(&file).expect("unitary serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: UnitaryFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("unitary file: {e}")))?;
        let m = file.real.len();
        let square = |rows: &[Vec<f64>]| rows.len() == m && rows.iter().all(|r| r.len() == m);
        if !square(&file.real) || !square(&file.imag) {
            return Err(Error::DimensionMismatch("unitary file must hold two m x m arrays".into()));
        }
        Self::new(CMatrix::from_fn(m, m, |i, j| C64::new(file.real[i][j], file.imag[i][j])))
    }
}

/// Which rows of `U_S` make up the square matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum OutputSpec {
    /// `t_j` copies of row `j`.
    Occupation(OccupationVector),
    /// Row `r_i` for every photon `i`, in tuple order.
    Assignment(ModeAssignment),
}

impl OutputSpec {
    fn photons(&self) -> usize {
        match self {
            OutputSpec::Occupation(t) => t.photons(),
            OutputSpec::Assignment(r) => r.len(),
        }
    }
}

/// Input occupation plus output selection defining `U_{S,T}` or `U_{S,r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmatrixSpec {
    pub input: OccupationVector,
    pub output: OutputSpec,
}

impl SubmatrixSpec {
    pub fn new(input: OccupationVector, output: OutputSpec) -> Result<Self> {
        let (n_in, n_out) = (input.photons(), output.photons());
        if n_in != n_out {
            return Err(Error::PhotonMismatch { input: n_in, output: n_out });
        }
        Ok(Self { input, output })
    }

    pub fn occupations(input: OccupationVector, output: OccupationVector) -> Result<Self> {
        Self::new(input, OutputSpec::Occupation(output))
    }

    pub fn assignment(input: OccupationVector, output: ModeAssignment) -> Result<Self> {
        Self::new(input, OutputSpec::Assignment(output))
    }
}

/// Expands an occupation vector into the list of repeated indices.
pub(crate) fn repeated_indices(occupations: &[usize]) -> Vec<usize> {
    occupations
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat(i).take(k))
        .collect()
}

/// The `rows.len() x cols.len()` matrix `M[a][b] = source[rows[a]][cols[b]]`.
pub(crate) fn select(source: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |a, b| source[(rows[a], cols[b])])
}

/// Builds `U_{S,T}` (or `U_{S,r}`): `s_i` copies of column `i` of `U`, then
/// `t_j` copies of row `j` (or row `r_i` per photon).
pub fn build_submatrix(unitary: &UnitaryMatrix, spec: &SubmatrixSpec) -> Result<CMatrix> {
    build_submatrix_of(unitary.matrix(), spec)
}

pub(crate) fn build_submatrix_of(matrix: &CMatrix, spec: &SubmatrixSpec) -> Result<CMatrix> {
    let m = matrix.nrows();
    if spec.input.modes() != m {
        return Err(Error::DimensionMismatch(format!(
            "input occupation has {} modes, matrix has {m}",
            spec.input.modes()
        )));
    }
    let cols = repeated_indices(spec.input.as_slice());
    let rows = match &spec.output {
        OutputSpec::Occupation(t) => {
            if t.modes() != m {
                return Err(Error::DimensionMismatch(format!(
                    "output occupation has {} modes, matrix has {m}",
                    t.modes()
                )));
            }
            repeated_indices(t.as_slice())
        }
        OutputSpec::Assignment(r) => {
            if let Some(&bad) = r.entries().iter().find(|&&x| x >= m) {
                return Err(Error::ModeOutOfRange { mode: bad + 1, modes: m });
            }
            r.entries().to_vec()
        }
    };
    Ok(select(matrix, &rows, &cols))
}

/// Operation counts predicted for evaluating `Per(U_{S,T})` by the repeated
/// expansion, and the worst case over the sampler's sub-configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostModel {
    /// `min(prod(s_i+1), prod(t_j+1)) * alpha_S * alpha_T`.
    pub tau_st: u128,
    /// `prod(s_i+1) * alpha_S * n`.
    pub tau_global: u128,
    pub alpha_s: usize,
    pub alpha_t: usize,
}

pub(crate) fn product_plus_one(occupations: &[usize]) -> u128 {
    occupations
        .iter()
        .fold(1u128, |acc, &s| acc.saturating_mul(s as u128 + 1))
}

pub(crate) fn support_size(occupations: &[usize]) -> usize {
    occupations.iter().filter(|&&s| s > 0).count()
}

/// Cost model for `Per(U_{S,T})`. Values saturate at `u128::MAX`.
pub fn cost_estimate(input: &OccupationVector, output: &OccupationVector) -> CostModel {
    let alpha_s = support_size(input.as_slice());
    let alpha_t = support_size(output.as_slice());
    let ps = product_plus_one(input.as_slice());
    let pt = product_plus_one(output.as_slice());
    CostModel {
        tau_st: ps.min(pt).saturating_mul(alpha_s as u128).saturating_mul(alpha_t as u128),
        tau_global: ps
            .saturating_mul(alpha_s as u128)
            .saturating_mul(input.photons() as u128),
        alpha_s,
        alpha_t,
    }
}
