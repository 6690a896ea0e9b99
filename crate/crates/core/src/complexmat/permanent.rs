use super::{product_plus_one, CMatrix, PairwiseSum, UnitaryMatrix, C64};
use crate::fock::OccupationVector;
use crate::{Error, Result};

/// Largest matrix `permanent_exact` accepts unless told otherwise.
pub const DEFAULT_PERMANENT_LIMIT: usize = 30;

/// `Per(M)` by Glynn's formula walked in Gray-code order, `O(2^n n)`.
pub fn permanent_exact(matrix: &CMatrix) -> Result<C64> {
    permanent_exact_with_limit(matrix, DEFAULT_PERMANENT_LIMIT)
}

pub fn permanent_exact_with_limit(matrix: &CMatrix, limit: usize) -> Result<C64> {
    glynn_gray(matrix, limit).map(|(value, _)| value)
}

/// Like [`permanent_exact`] but also returns the number of elementary complex
/// operations (row-sum updates and multiplications) performed.
pub fn permanent_exact_counted(matrix: &CMatrix) -> Result<(C64, u64)> {
    glynn_gray(matrix, DEFAULT_PERMANENT_LIMIT)
}

fn glynn_gray(matrix: &CMatrix, limit: usize) -> Result<(C64, u64)> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "permanent needs a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let n = matrix.nrows();
    if n > limit {
        return Err(Error::PermanentTooLarge { size: n, limit });
    }
    if n == 0 {
        return Ok((C64::new(1.0, 0.0), 0));
    }

    // Column 0 keeps delta = +1; the remaining n-1 signs run through a
    // reflected Gray code so each step flips exactly one column.
    let mut row_sums: Vec<C64> = (0..n).map(|i| matrix.row(i).iter().sum()).collect();
    let mut negated = vec![false; n];
    let mut ops = (n * n) as u64;
    let mut acc = PairwiseSum::new();
    let mut sign = 1.0;

    acc.add(row_sums.iter().product());
    ops += n as u64;

    for step in 1u64..(1u64 << (n - 1)) {
        let col = step.trailing_zeros() as usize + 1;
        let column = matrix.column(col);
        if negated[col] {
            for (s, &v) in row_sums.iter_mut().zip(column.iter()) {
                *s += v * 2.0;
            }
        } else {
            for (s, &v) in row_sums.iter_mut().zip(column.iter()) {
                *s -= v * 2.0;
            }
        }
        negated[col] = !negated[col];
        sign = -sign;
        let prod: C64 = row_sums.iter().product();
        acc.add(prod * sign);
        ops += 2 * n as u64;
    }

    let scale = 0.5f64.powi(n as i32 - 1);
    Ok((acc.total() * scale, ops))
}

/// `Per(U_{S,T})` through the expansion over partial sign patterns of the
/// repeated columns:
///
/// `2^-n sum_v (-1)^{|v|} prod_j C(s_j, v_j) prod_i [sum_j (s_j - 2 v_j) U_ij]^{t_i}`
///
/// where `j` runs over occupied input modes and `i` over occupied output
/// modes. When `prod(t_i+1) < prod(s_j+1)` the roles of `S` and `T` are
/// exchanged on `U^T`, which leaves the permanent unchanged.
pub fn permanent_repeated(
    unitary: &UnitaryMatrix,
    input: &OccupationVector,
    output: &OccupationVector,
) -> Result<C64> {
    permanent_repeated_counted(unitary, input, output).map(|(value, _)| value)
}

/// [`permanent_repeated`] plus the number of `v` terms evaluated.
pub fn permanent_repeated_counted(
    unitary: &UnitaryMatrix,
    input: &OccupationVector,
    output: &OccupationVector,
) -> Result<(C64, u64)> {
    let m = unitary.dim();
    if input.modes() != m || output.modes() != m {
        return Err(Error::DimensionMismatch(format!(
            "occupations over {} and {} modes for a {m}-mode unitary",
            input.modes(),
            output.modes()
        )));
    }
    if input.photons() != output.photons() {
        return Err(Error::PhotonMismatch { input: input.photons(), output: output.photons() });
    }
    let (value, terms, _) =
        repeated_permanent_of(unitary.matrix(), input.as_slice(), output.as_slice());
    Ok((value, terms))
}

/// Unchecked core of [`permanent_repeated`]. Returns the value, the number of
/// `v` terms and the elementary operation count `terms * alpha_S * alpha_T`.
pub(crate) fn repeated_permanent_of(
    matrix: &CMatrix,
    input: &[usize],
    output: &[usize],
) -> (C64, u64, u64) {
    let cols: Vec<(usize, usize)> = occupied(input);
    let rows: Vec<(usize, usize)> = occupied(output);
    if product_plus_one(output) < product_plus_one(input) {
        // Per(U_{S,T}) = Per((U^T)_{T,S}).
        expansion(&rows, &cols, |r, c| matrix[(c, r)])
    } else {
        expansion(&cols, &rows, |r, c| matrix[(r, c)])
    }
}

fn occupied(occupations: &[usize]) -> Vec<(usize, usize)> {
    occupations
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| (i, k))
        .collect()
}

fn expansion(
    cols: &[(usize, usize)],
    rows: &[(usize, usize)],
    entry: impl Fn(usize, usize) -> C64,
) -> (C64, u64, u64) {
    let n: usize = cols.iter().map(|&(_, k)| k).sum();
    let grid: Vec<Vec<C64>> = rows
        .iter()
        .map(|&(r, _)| cols.iter().map(|&(c, _)| entry(r, c)).collect())
        .collect();
    let binomials: Vec<Vec<f64>> = cols.iter().map(|&(_, s)| binomial_row(s)).collect();

    let mut v = vec![0usize; cols.len()];
    let mut acc = PairwiseSum::new();
    let mut terms = 0u64;
    loop {
        let mut weight = 1.0;
        let mut flips = 0usize;
        for (c, &vc) in v.iter().enumerate() {
            weight *= binomials[c][vc];
            flips += vc;
        }
        if flips % 2 == 1 {
            weight = -weight;
        }
        let mut term = C64::new(weight, 0.0);
        for (row, &(_, t)) in grid.iter().zip(rows) {
            let mut x = C64::new(0.0, 0.0);
            for ((&u, &(_, s)), &vc) in row.iter().zip(cols).zip(&v) {
                x += u * (s as f64 - 2.0 * vc as f64);
            }
            term *= x.powi(t as i32);
        }
        acc.add(term);
        terms += 1;

        // Mixed-radix odometer over 0 <= v_j <= s_j.
        let mut pos = 0;
        loop {
            if pos == v.len() {
                let ops = terms * cols.len() as u64 * rows.len() as u64;
                return (acc.total() * 0.5f64.powi(n as i32), terms, ops);
            }
            if v[pos] < cols[pos].1 {
                v[pos] += 1;
                break;
            }
            v[pos] = 0;
            pos += 1;
        }
    }
}

fn binomial_row(s: usize) -> Vec<f64> {
    let mut row = vec![1.0f64; s + 1];
    for k in 1..=s {
        row[k] = row[k - 1] * (s + 1 - k) as f64 / k as f64;
    }
    row.iter().map(|x| x.round()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexmat::{build_submatrix, SubmatrixSpec};
    use crate::oracle::permanent_naive;
    use proptest::prelude::*;

    fn occ(v: &[usize]) -> OccupationVector {
        OccupationVector::new(v.to_vec()).unwrap()
    }

    fn rel_err(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn identity_and_all_ones() {
        let id = CMatrix::identity(3, 3);
        assert!((permanent_exact(&id).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
        let ones = CMatrix::from_element(3, 3, C64::new(1.0, 0.0));
        assert!((permanent_exact(&ones).unwrap() - C64::new(6.0, 0.0)).norm() < 1e-13);
        let empty = CMatrix::zeros(0, 0);
        assert_eq!(permanent_exact(&empty).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn glynn_matches_permutation_sum() {
        let u = UnitaryMatrix::seeded(4, 11);
        let exact = permanent_exact(u.matrix()).unwrap();
        let naive = permanent_naive(u.matrix());
        assert!(rel_err(exact, naive) < 1e-12);
    }

    #[test]
    fn size_limit_is_enforced() {
        let big = CMatrix::identity(5, 5);
        assert!(matches!(
            permanent_exact_with_limit(&big, 4),
            Err(Error::PermanentTooLarge { size: 5, limit: 4 })
        ));
        assert!(permanent_exact(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn glynn_operation_count_is_linear_in_two_to_the_n() {
        for n in 1..=12 {
            let m = CMatrix::from_element(n, n, C64::new(0.5, 0.1));
            let (_, ops) = permanent_exact_counted(&m).unwrap();
            let bound = (1u64 << n) * n as u64 + (n * n) as u64;
            assert!(ops <= bound, "n={n}: {ops} > {bound}");
        }
    }

    #[test]
    fn hong_ou_mandel_suppression() {
        let h = UnitaryMatrix::balanced_beam_splitter();
        let p = permanent_repeated(&h, &occ(&[1, 1]), &occ(&[1, 1])).unwrap();
        assert!(p.norm() < 1e-15);
    }

    #[test]
    fn all_photons_in_first_mode() {
        let u = UnitaryMatrix::seeded(3, 5);
        let s = occ(&[4, 0, 0]);
        let p = permanent_repeated(&u, &s, &s).unwrap();
        let expected = u.matrix()[(0, 0)].powi(4) * 24.0;
        assert!(rel_err(p, expected) < 1e-12);
    }

    #[test]
    fn repeated_matches_glynn_on_explicit_submatrix() {
        let u = UnitaryMatrix::seeded(5, 21);
        let s = occ(&[3, 2, 0, 0, 0]);
        let t = occ(&[1, 1, 1, 1, 1]);
        let rep = permanent_repeated(&u, &s, &t).unwrap();
        let sub = build_submatrix(&u, &SubmatrixSpec::occupations(s, t).unwrap()).unwrap();
        assert!(rel_err(rep, permanent_exact(&sub).unwrap()) < 1e-9);
    }

    #[test]
    fn repeated_reports_term_counts() {
        let u = UnitaryMatrix::seeded(3, 1);
        let (_, terms) = permanent_repeated_counted(&u, &occ(&[2, 1, 0]), &occ(&[1, 1, 1])).unwrap();
        assert_eq!(terms, 6);
        // Transposed orientation: prod(t+1) = 4 < prod(s+1) = 8.
        let (_, terms) = permanent_repeated_counted(&u, &occ(&[1, 1, 1]), &occ(&[3, 0, 0])).unwrap();
        assert_eq!(terms, 4);
    }

    #[test]
    fn repeated_rejects_mismatch() {
        let u = UnitaryMatrix::seeded(3, 1);
        assert!(matches!(
            permanent_repeated(&u, &occ(&[1, 1, 0]), &occ(&[1, 1, 1])),
            Err(Error::PhotonMismatch { .. })
        ));
    }

    fn arb_instance() -> impl Strategy<Value = (u64, Vec<usize>, Vec<usize>)> {
        (2usize..=5).prop_flat_map(|m| {
            (1usize..=6).prop_flat_map(move |n| {
                (
                    any::<u64>(),
                    proptest::collection::vec(0usize..m, n),
                    proptest::collection::vec(0usize..m, n),
                )
                    .prop_map(move |(seed, a, b)| {
                        let mut s = vec![0; m];
                        let mut t = vec![0; m];
                        a.into_iter().for_each(|i| s[i] += 1);
                        b.into_iter().for_each(|i| t[i] += 1);
                        (seed, s, t)
                    })
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn repeated_expansion_agrees_with_glynn((seed, s, t) in arb_instance()) {
            let u = UnitaryMatrix::seeded(s.len(), seed);
            let (s, t) = (occ(&s), occ(&t));
            let rep = permanent_repeated(&u, &s, &t).unwrap();
            let sub = build_submatrix(&u, &SubmatrixSpec::occupations(s, t).unwrap()).unwrap();
            let glynn = permanent_exact(&sub).unwrap();
            prop_assert!((rep - glynn).norm() <= 1e-9 * glynn.norm().max(1e-12));
        }

        #[test]
        fn exchanging_roles_on_the_transpose((seed, s, t) in arb_instance()) {
            let u = UnitaryMatrix::seeded(s.len(), seed);
            let (s, t) = (occ(&s), occ(&t));
            let a = permanent_repeated(&u, &s, &t).unwrap();
            let b = permanent_repeated(&u.transpose(), &t, &s).unwrap();
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-9 * a.norm().max(1e-12));
        }

        #[test]
        fn invariant_under_row_and_column_permutations(
            seed in any::<u64>(),
            n in 1usize..=6,
            shift in 0usize..6,
        ) {
            let m = CMatrix::from_fn(n, n, |r, c| {
                let x = ((seed ^ (r * 31 + c * 7) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64
                    / (1u64 << 53) as f64;
                C64::new(x - 0.5, (x * 3.0).fract() - 0.5)
            });
            let k = shift % n;
            let rows_rotated = CMatrix::from_fn(n, n, |r, c| m[((r + k) % n, c)]);
            let cols_reversed = CMatrix::from_fn(n, n, |r, c| m[(r, n - 1 - c)]);
            let p = permanent_exact(&m).unwrap();
            let scale = p.norm().max(1e-3);
            prop_assert!((permanent_exact(&rows_rotated).unwrap() - p).norm() <= 1e-12 * scale);
            prop_assert!((permanent_exact(&cols_reversed).unwrap() - p).norm() <= 1e-12 * scale);
        }
    }
}
