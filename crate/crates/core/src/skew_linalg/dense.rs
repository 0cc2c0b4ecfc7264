use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{PfrmtError, Result};
use crate::scalar::{abs1, lower, Real};

/// Row-major dense complex matrix, used for coupling blocks and LU work.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T: Real = f64> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx] + a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|&z| lower(z).norm()).fold(0.0, f64::max)
    }

    /// Maximum column sum of absolute values.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| lower(self.get(i, j)).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

/// LU factorization with partial pivoting, `P A = L U`, stored compactly.
pub(crate) struct Lu<T: Real> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
    sign: T,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub(crate) fn new(a: &DenseMatrix<T>) -> Self {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = abs1(lu.get(k, k));
            for i in k + 1..n {
                let v = abs1(lu.get(i, k));
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best.is_zero() {
                singular = true;
                continue;
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let l = lu.get(i, k) / pivot;
                lu.set(i, k, l);
                if l.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let v = lu.get(i, j) - l * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Lu { lu, perm, sign, singular }
    }

    pub(crate) fn det(&self) -> Complex<T> {
        if self.singular {
            return Complex::zero();
        }
        let n = self.lu.rows;
        (0..n).fold(Complex::new(self.sign, T::zero()), |acc, k| acc * self.lu.get(k, k))
    }

    pub(crate) fn inverse(&self) -> Option<DenseMatrix<T>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut col = vec![Complex::<T>::zero(); n];
        for c in 0..n {
            for i in 0..n {
                col[i] = if self.perm[i] == c { Complex::one() } else { Complex::zero() };
            }
            for i in 0..n {
                let mut s = col[i];
                for k in 0..i {
                    s = s - self.lu.get(i, k) * col[k];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for k in i + 1..n {
                    s = s - self.lu.get(i, k) * col[k];
                }
                col[i] = s / self.lu.get(i, i);
            }
            for i in 0..n {
                inv.set(i, c, col[i]);
            }
        }
        Some(inv)
    }
}

/// Determinant by partially pivoted LU.
pub fn det<T: Real>(a: &DenseMatrix<T>) -> Result<Complex<T>> {
    if a.rows != a.cols {
        return Err(PfrmtError::Dimension(format!(
            "determinant of a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    if !a.is_finite() {
        return Err(PfrmtError::Numeric("non-finite entry in determinant input".into()));
    }
    Ok(Lu::new(a).det())
}
