use num_complex::Complex;
use num_traits::{One, Zero};

use super::dense::{DenseMatrix, Lu};
use super::SkewMatrix;
use crate::error::{PfrmtError, Result};
use crate::scalar::{abs1, lower, Real};

/// Pfaffian by Parlett–Reid skew elimination with partial pivoting.
///
/// Convention: `Pf = 1/(2^N N!) Σ_ω sgn(ω) Π_j a[ω(2j-1)][ω(2j)]`, so the
/// 2×2 block `[[0, a], [-a, 0]]` has Pfaffian `a`, and the empty matrix 1.
pub fn pfaffian<T: Real>(a: &SkewMatrix<T>) -> Result<Complex<T>> {
    let n = a.dim();
    if n % 2 == 1 {
        return Err(PfrmtError::Dimension(format!("Pfaffian of odd dimension {n}")));
    }
    if !a.is_finite() {
        return Err(PfrmtError::Numeric("non-finite entry in Pfaffian input".into()));
    }
    let mut w = a.to_dense();
    let mut pf = Complex::<T>::one();
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = abs1(w.get(k + 1, k));
        for i in k + 2..n {
            let v = abs1(w.get(i, k));
            if v > best {
                best = v;
                kp = i;
            }
        }
        if best.is_zero() {
            return Ok(Complex::zero());
        }
        if kp != k + 1 {
            w.swap_rows(k + 1, kp);
            for i in 0..n {
                let t = w.get(i, k + 1);
                w.set(i, k + 1, w.get(i, kp));
                w.set(i, kp, t);
            }
            pf = -pf;
        }
        let piv = w.get(k, k + 1);
        pf = pf * piv;
        if k + 2 < n {
            let tau: Vec<Complex<T>> = (k + 2..n).map(|j| w.get(k, j) / piv).collect();
            let col: Vec<Complex<T>> = (k + 2..n).map(|j| w.get(j, k + 1)).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    if i == j {
                        continue;
                    }
                    let v = w.get(i, j) + tau[ii] * col[jj] - col[ii] * tau[jj];
                    w.set(i, j, v);
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}

/// Exponential-cost Pfaffian by expansion along the first row; reference only.
#[cfg(test)]
pub(crate) fn pfaffian_by_pairings(a: &SkewMatrix<f64>) -> num_complex::Complex64 {
    fn rec(a: &SkewMatrix<f64>, idx: &[usize]) -> num_complex::Complex64 {
        if idx.is_empty() {
            return num_complex::Complex64::new(1.0, 0.0);
        }
        let first = idx[0];
        let mut total = num_complex::Complex64::new(0.0, 0.0);
        for (pos, &other) in idx.iter().enumerate().skip(1) {
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != other).collect();
            let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * a.get(first, other) * rec(a, &rest);
        }
        total
    }
    let idx: Vec<usize> = (0..a.dim()).collect();
    rec(a, &idx)
}

/// Inverse of an antisymmetric matrix with diagnostics.
#[derive(Debug, Clone)]
pub struct SkewInverse<T: Real = f64> {
    pub inverse: SkewMatrix<T>,
    /// `max |D D⁻¹ - I|`.
    pub residual: f64,
    /// `1 / (‖D‖₁ ‖D⁻¹‖₁)`.
    pub rcond: f64,
}

/// Inverts `d` by pivoted LU, then re-antisymmetrizes `(X - Xᵀ)/2`.
/// Fails with `SingularMatrix` when the reciprocal condition number falls
/// below the precision's threshold (1e-13 double, 1e-28 extended).
pub fn skew_inverse<T: Real>(d: &SkewMatrix<T>) -> Result<SkewInverse<T>> {
    let n = d.dim();
    if n % 2 == 1 {
        return Err(PfrmtError::Dimension(format!("odd skew matrix ({n}) is always singular")));
    }
    if !d.is_finite() {
        return Err(PfrmtError::Numeric("non-finite entry in matrix to invert".into()));
    }
    let dense = d.to_dense();
    let x = Lu::new(&dense).inverse().ok_or(PfrmtError::SingularMatrix { rcond: 0.0 })?;
    let rcond = if n == 0 { 1.0 } else { 1.0 / (dense.norm1() * x.norm1()) };
    if !(rcond >= T::RCOND_MIN) {
        return Err(PfrmtError::SingularMatrix { rcond: if rcond.is_nan() { 0.0 } else { rcond } });
    }
    let half = T::of(0.5);
    let inverse = SkewMatrix::from_upper(n, |i, j| (x.get(i, j) - x.get(j, i)) * half);
    let prod = dense.matmul(&inverse.to_dense());
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { Complex::one() } else { Complex::zero() };
            residual = residual.max(lower(prod.get(i, j) - e).norm());
        }
    }
    Ok(SkewInverse { inverse, residual, rcond })
}

/// `Pf(D) · Pf(A + B D⁻¹ Bᵀ)`, which equals `Pf([[A, B], [-Bᵀ, D]])`.
pub fn pfaffian_schur<T: Real>(
    a: &SkewMatrix<T>,
    b: &DenseMatrix<T>,
    d: &SkewMatrix<T>,
) -> Result<Complex<T>> {
    if b.rows() != a.dim() || b.cols() != d.dim() {
        return Err(PfrmtError::Dimension(format!(
            "coupling block is {}x{}, expected {}x{}",
            b.rows(),
            b.cols(),
            a.dim(),
            d.dim()
        )));
    }
    if a.dim() % 2 == 1 || d.dim() % 2 == 1 {
        return Err(PfrmtError::Dimension("Schur blocks must be even-dimensional".into()));
    }
    let dinv = skew_inverse(d)?.inverse;
    let corr = b.matmul(&dinv.to_dense()).matmul(&b.transpose());
    let schur = SkewMatrix::from_upper(a.dim(), |i, j| a.get(i, j) + corr.get(i, j));
    Ok(pfaffian(d)? * pfaffian(&schur)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skew_linalg::det;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> SkewMatrix<f64> {
        SkewMatrix::from_upper(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn two_by_two_and_empty() {
        let a = SkewMatrix::<f64>::from_upper(2, |_, _| Complex64::new(3.0, -1.0));
        assert_eq!(pfaffian(&a).unwrap(), Complex64::new(3.0, -1.0));
        assert_eq!(pfaffian(&SkewMatrix::<f64>::zeros(0)).unwrap(), c(1.0));
    }

    #[test]
    fn four_by_four_matches_pairing_sum() {
        let vals = [[0.0, 1.0, 2.0, 3.0], [0.0, 0.0, 4.0, 5.0], [0.0, 0.0, 0.0, 6.0]];
        let a = SkewMatrix::<f64>::from_upper(4, |i, j| c(vals[i][j]));
        assert_eq!(pfaffian_by_pairings(&a), c(8.0));
        assert!((pfaffian(&a).unwrap() - c(8.0)).norm() < 1e-14);
    }

    #[test]
    fn odd_and_nonfinite_inputs_are_rejected() {
        assert!(matches!(pfaffian(&SkewMatrix::<f64>::zeros(3)), Err(PfrmtError::Dimension(_))));
        let a = SkewMatrix::<f64>::from_upper(2, |_, _| c(f64::NAN));
        assert!(matches!(pfaffian(&a), Err(PfrmtError::Numeric(_))));
    }

    #[test]
    fn elimination_matches_pairing_sum_up_to_dim_8() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4, 6, 8] {
            for _ in 0..10 {
                let a = random_skew(&mut rng, n);
                let r = pfaffian_by_pairings(&a);
                let p = pfaffian(&a).unwrap();
                assert!((p - r).norm() <= 1e-12 * r.norm().max(1.0), "n={n}: {p} vs {r}");
            }
        }
    }

    #[test]
    fn square_is_determinant_in_extended_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_skew(&mut rng, 12);
        let ax = a.cast::<crate::scalar::DoubleDouble>();
        let pf = pfaffian(&ax).unwrap();
        let dt = det(&ax.to_dense()).unwrap();
        let diff = lower(pf * pf - dt).norm() / lower(dt).norm();
        assert!(diff < 1e-26, "extended relative defect {diff:e}");
    }

    #[test]
    fn inverse_of_two_by_two() {
        let a = SkewMatrix::<f64>::from_upper(2, |_, _| c(2.0));
        let inv = skew_inverse(&a).unwrap();
        assert_eq!(inv.inverse.get(0, 1), c(-0.5));
        assert_eq!(inv.inverse.get(1, 0), c(0.5));
    }

    #[test]
    fn inverse_of_block_diagonal_is_blockwise() {
        let vals = [2.0, -4.0, 0.5];
        let a = SkewMatrix::<f64>::from_upper(6, |i, j| {
            if i % 2 == 0 && j == i + 1 {
                c(vals[i / 2])
            } else {
                c(0.0)
            }
        });
        let inv = skew_inverse(&a).unwrap().inverse;
        for (k, v) in vals.iter().enumerate() {
            assert!((inv.get(2 * k, 2 * k + 1) - c(-1.0 / v)).norm() < 1e-15);
        }
        assert_eq!(inv.get(0, 2), c(0.0));
    }

    #[test]
    fn singular_input_reports_condition() {
        let a = SkewMatrix::<f64>::from_upper(4, |i, j| if (i, j) == (0, 1) { c(1.0) } else { c(0.0) });
        assert!(matches!(skew_inverse(&a), Err(PfrmtError::SingularMatrix { .. })));
        let near = SkewMatrix::<f64>::from_upper(2, |_, _| c(1e-300));
        assert!(skew_inverse(&near).is_ok());
        let ill = SkewMatrix::<f64>::from_upper(4, |i, j| match (i, j) {
            (0, 1) => c(1.0),
            (2, 3) => c(1e-15),
            _ => c(0.0),
        });
        match skew_inverse(&ill) {
            Err(PfrmtError::SingularMatrix { rcond }) => assert!(rcond < 1e-13),
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn schur_trivial_cases() {
        let a = SkewMatrix::<f64>::zeros(2);
        let d = SkewMatrix::<f64>::from_upper(2, |_, _| c(1.0));
        let b = DenseMatrix::<f64>::zeros(2, 2);
        assert_eq!(pfaffian_schur(&a, &b, &d).unwrap(), c(0.0));
        let a = SkewMatrix::<f64>::from_upper(2, |_, _| c(3.0));
        assert!((pfaffian_schur(&a, &b, &d).unwrap() - c(3.0)).norm() < 1e-15);
    }
}
