//! Skew-symmetric linear algebra and the determinant identities built on it.

mod dense;
mod identities;
mod pfaffian;

pub use dense::{det, DenseMatrix};
pub use identities::{
    mixed_sign, mixed_sign_closed_form, sqrt_berezinian_kk, sqrt_berezinian_mixed, vandermonde,
    vandermonde_det_form, MixedBerezinian, SpectralParams,
};
pub use pfaffian::{pfaffian, pfaffian_schur, skew_inverse, SkewInverse};

use num_complex::{Complex, Complex64};
use num_traits::Zero;

use crate::error::{PfrmtError, Result};
use crate::scalar::{lift, lower, Real};

/// Dense antisymmetric complex matrix. The diagonal is exactly zero and
/// `a[j][i] == -a[i][j]` holds bitwise; every mutator writes both halves.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix<T: Real = f64> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> SkewMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        SkewMatrix { dim, data: vec![Complex::zero(); dim * dim] }
    }

    /// Builds the matrix from its strict upper triangle, `f(i, j)` for `i < j`.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i + 1..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Accepts a dense square matrix whose antisymmetric defect is below `tol`
    /// relative to its largest entry, then stores `(X - Xᵀ)/2`.
    pub fn from_dense(x: &DenseMatrix<T>, tol: f64) -> Result<Self> {
        if x.rows() != x.cols() {
            return Err(PfrmtError::Dimension(format!(
                "expected a square matrix, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        let n = x.rows();
        let scale = x.max_abs().max(f64::MIN_POSITIVE);
        let half = T::of(0.5);
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let defect = lower(x.get(i, j) + x.get(j, i)).norm();
                if defect > tol * scale {
                    return Err(PfrmtError::Numeric(format!(
                        "entry ({i},{j}) breaks antisymmetry by {defect:.3e}"
                    )));
                }
                if i != j {
                    m.set(i, j, (x.get(i, j) - x.get(j, i)) * half);
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    /// Sets `a[i][j] = v` and `a[j][i] = -v`. Diagonal writes must be zero.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        if i == j {
            debug_assert!(v.is_zero(), "diagonal of a skew matrix must vanish");
            return;
        }
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = -v;
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn cast<U: Real>(&self) -> SkewMatrix<U> {
        SkewMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| lift::<U>(lower(z))).collect(),
        }
    }

    /// `P A Pᵀ` for the permutation sending new index `k` to old index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim);
        SkewMatrix::from_upper(self.dim, |i, j| self.get(perm[i], perm[j]))
    }

    /// Principal submatrix on the given (ordered) index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        SkewMatrix::from_upper(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|&z| lower(z).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(A + B)`, entrywise.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        SkewMatrix::from_upper(self.dim, |i, j| self.get(i, j) + other.get(i, j))
    }

    /// Block matrix `[[A, B], [-Bᵀ, D]]`.
    pub fn assemble(a: &Self, b: &DenseMatrix<T>, d: &Self) -> Result<Self> {
        if b.rows() != a.dim || b.cols() != d.dim {
            return Err(PfrmtError::Dimension(format!(
                "coupling block is {}x{}, expected {}x{}",
                b.rows(),
                b.cols(),
                a.dim,
                d.dim
            )));
        }
        let (na, n) = (a.dim, a.dim + d.dim);
        Ok(SkewMatrix::from_upper(n, |i, j| match (i < na, j < na) {
            (true, true) => a.get(i, j),
            (true, false) => b.get(i, j - na),
            _ => d.get(i - na, j - na),
        }))
    }
}

impl SkewMatrix<f64> {
    /// Convenience constructor from rows of `f64` complex values.
    pub fn from_rows(rows: &[Vec<Complex64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PfrmtError::Dimension("rows of unequal length".into()));
        }
        Self::from_dense(&DenseMatrix::from_fn(n, n, |i, j| rows[i][j]), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_non_antisymmetric_input() {
        let rows = vec![vec![c(0.0), c(1.0)], vec![c(-0.5), c(0.0)]];
        assert!(matches!(SkewMatrix::from_rows(&rows, 1e-12), Err(PfrmtError::Numeric(_))));
    }

    #[test]
    fn from_dense_enforces_exact_antisymmetry() {
        let rows = vec![vec![c(1e-17), c(1.0)], vec![c(-1.0 - 1e-16), c(0.0)]];
        let m = SkewMatrix::from_rows(&rows, 1e-12).unwrap();
        assert_eq!(m.get(0, 1), -m.get(1, 0));
        assert_eq!(m.get(0, 0), c(0.0));
    }

    #[test]
    fn assemble_places_blocks() {
        let a = SkewMatrix::<f64>::from_upper(2, |_, _| c(1.0));
        let d = SkewMatrix::<f64>::from_upper(2, |_, _| c(2.0));
        let b = DenseMatrix::from_fn(2, 2, |i, j| c((10 * i + j) as f64));
        let m = SkewMatrix::assemble(&a, &b, &d).unwrap();
        assert_eq!(m.get(0, 1), c(1.0));
        assert_eq!(m.get(1, 3), c(11.0));
        assert_eq!(m.get(3, 1), c(-11.0));
        assert_eq!(m.get(2, 3), c(2.0));
    }
}
