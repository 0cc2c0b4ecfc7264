//! Monic skew-orthogonal polynomials read off a moment matrix.
//!
//! With the pairing `⟨p, q⟩ = pᵀ M q` on coefficient vectors, the basis
//! `q₀, q₁, …` (degree `j`, leading coefficient 1) satisfies
//! `⟨q_{2i}, q_{2i+1}⟩ = r_i` and all other pairings zero, so
//! `T M Tᵀ = ⊕ [[0, r_i], [-r_i, 0]]` and `Pf M = Π r_i` (`det T = 1`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{MomentMatrix, PairMeasure};
use crate::error::{PfrmtError, Result};
use crate::kernels::{assembled_matrix, assembled_prefactor, dispatch, EvalOptions, Parity};
use crate::scalar::{lower, DoubleDouble, Precision, Real};
use crate::skew_linalg::{pfaffian, SkewMatrix, SpectralParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewPolynomialBasis {
    pub d: usize,
    /// `coeffs[j][k]` is the coefficient of `x^k` in `q_j`; `coeffs[j][j] = 1`.
    pub coeffs: Vec<Vec<f64>>,
    pub pairing_norms: Vec<f64>,
}

impl SkewPolynomialBasis {
    /// `q_j(x)` by Horner's rule.
    pub fn eval(&self, j: usize, x: Complex64) -> Complex64 {
        self.coeffs[j].iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// `Π r_i`, which equals `Pf M`.
    pub fn pfaffian(&self) -> f64 {
        self.pairing_norms.iter().product()
    }

    /// Leading `n × n` block of the triangular coefficient matrix, as a dense complex matrix.
    fn transform(&self, n: usize) -> Vec<Vec<Complex64>> {
        (0..n).map(|j| (0..n).map(|k| Complex64::new(if k <= j { self.coeffs[j][k] } else { 0.0 }, 0.0)).collect()).collect()
    }
}

fn real_moments(m: &MomentMatrix) -> Result<Vec<Vec<f64>>> {
    if m.bordered || m.d % 2 == 1 || m.d == 0 {
        return Err(PfrmtError::Dimension(format!("skew orthogonalization needs an even, unbordered moment matrix (d={})", m.d)));
    }
    let scale = m.matrix.max_abs().max(f64::MIN_POSITIVE);
    let mut out = vec![vec![0.0; m.d]; m.d];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let z = m.matrix.get(i, j);
            if z.im.abs() > 1e-12 * scale {
                return Err(PfrmtError::Numeric("moment matrix is not real".into()));
            }
            *v = z.re;
        }
    }
    Ok(out)
}

fn pairing<T: Real>(m: &[Vec<T>], p: &[T], q: &[T]) -> T {
    let mut s = T::zero();
    for (i, &pi) in p.iter().enumerate() {
        if pi == T::zero() {
            continue;
        }
        for (j, &qj) in q.iter().enumerate() {
            s = s + pi * m[i][j] * qj;
        }
    }
    s
}

fn lift_rows(m: &[Vec<f64>]) -> Vec<Vec<DoubleDouble>> {
    m.iter().map(|r| r.iter().map(|&x| DoubleDouble::of(x)).collect()).collect()
}

/// Skew Gram–Schmidt over index pairs `(2i, 2i+1)`, each new monomial
/// projected against all earlier pairs. A vanishing pairing norm stops the
/// recursion with [`PfrmtError::Breakdown`] at that pair.
pub fn skew_orthogonalize(m: &MomentMatrix) -> Result<SkewPolynomialBasis> {
    let mm = lift_rows(&real_moments(m)?);
    let d = m.d;
    let scale = m.matrix.max_abs();
    let zero = DoubleDouble::of(0.0);
    let mut coeffs: Vec<Vec<DoubleDouble>> = Vec::with_capacity(d);
    let mut norms: Vec<DoubleDouble> = Vec::with_capacity(d / 2);
    for i in 0..d / 2 {
        for deg in [2 * i, 2 * i + 1] {
            let mut q = vec![zero; d];
            q[deg] = DoubleDouble::of(1.0);
            let mono = q.clone();
            for (j, &r) in norms.iter().enumerate() {
                let (a, b) = (&coeffs[2 * j], &coeffs[2 * j + 1]);
                let ca = pairing(&mm, &mono, b) / r;
                let cb = pairing(&mm, &mono, a) / r;
                for k in 0..d {
                    q[k] = q[k] - (ca * a[k] - cb * b[k]);
                }
            }
            coeffs.push(q);
        }
        let r = pairing(&mm, &coeffs[2 * i], &coeffs[2 * i + 1]);
        if !r.is_finite() || r.f64().abs() <= 1e-14 * scale {
            return Err(PfrmtError::Breakdown { step: i });
        }
        norms.push(r);
    }
    Ok(SkewPolynomialBasis {
        d,
        coeffs: coeffs.iter().map(|q| q.iter().map(|c| c.f64()).collect()).collect(),
        pairing_norms: norms.iter().map(|r| r.f64()).collect(),
    })
}

/// Residuals of `T M Tᵀ` against its ideal block-diagonal form, each entry
/// scaled by `√(|r_a| |r_b|)` of the pairs it couples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagonalReport {
    /// Largest scaled entry outside the 2×2 diagonal blocks.
    pub max_off_block: f64,
    /// Largest scaled mismatch of a diagonal block against `r_i`.
    pub max_block_mismatch: f64,
}

impl BlockDiagonalReport {
    pub fn max_residual(&self) -> f64 {
        self.max_off_block.max(self.max_block_mismatch)
    }
}

pub fn verify_block_diagonal(basis: &SkewPolynomialBasis, m: &MomentMatrix) -> BlockDiagonalReport {
    let d = basis.d.min(m.d);
    let mm = lift_rows(&(0..m.d).map(|i| (0..m.d).map(|j| m.matrix.get(i, j).re).collect::<Vec<_>>()).collect::<Vec<_>>());
    let coeff = |j: usize| -> Vec<DoubleDouble> {
        let mut v: Vec<DoubleDouble> = basis.coeffs[j].iter().map(|&c| DoubleDouble::of(c)).collect();
        v.resize(m.d, DoubleDouble::of(0.0));
        v
    };
    let (mut off, mut mis) = (0.0f64, 0.0f64);
    for a in 0..d {
        let qa = coeff(a);
        for b in 0..d {
            let v = pairing(&mm, &qa, &coeff(b)).f64();
            let s = (basis.pairing_norms[a / 2].abs() * basis.pairing_norms[b / 2].abs()).sqrt();
            if a / 2 == b / 2 {
                let ideal = match (a % 2, b % 2) {
                    (0, 1) => basis.pairing_norms[a / 2],
                    (1, 0) => -basis.pairing_norms[a / 2],
                    _ => 0.0,
                };
                mis = mis.max((v - ideal).abs() / s);
            } else {
                off = off.max(v.abs() / s);
            }
        }
    }
    BlockDiagonalReport { max_off_block: off, max_block_mismatch: mis }
}

/// The assembled Pfaffian with the monomial rows and columns replaced by the
/// first `d` skew-orthogonal polynomials (`d` the monomial block size of the
/// instance); the value must equal the monomial-basis one.
pub fn z_in_basis(
    measure: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
    basis: &SkewPolynomialBasis,
    opts: &EvalOptions,
) -> Result<Complex64> {
    p.validate()?;
    let (_, d) = dispatch(p.k1(), p.k2(), parity.vars(n_pairs));
    if d < 0 {
        return Err(PfrmtError::Regime("no monomial block when d < 0".into()));
    }
    let d = d as usize;
    if basis.d < d {
        return Err(PfrmtError::Dimension(format!("basis has {} polynomials, block needs {d}", basis.d)));
    }
    let a = assembled_matrix(measure, n_pairs, p, parity)?;
    let off = p.k1() + p.k2();
    let t = basis.transform(d);
    // B A Bᵀ with B = I ⊕ T ⊕ I, so only rows/columns off..off+d mix.
    let n = a.dim();
    let row = |i: usize, j: usize| -> Complex64 {
        if (off..off + d).contains(&i) {
            (0..d).map(|k| t[i - off][k] * a.get(off + k, j)).sum()
        } else {
            a.get(i, j)
        }
    };
    let mut half = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, r) in half.iter_mut().enumerate() {
        for (j, v) in r.iter_mut().enumerate() {
            *v = row(i, j);
        }
    }
    let sub = SkewMatrix::from_upper(n, |i, j| {
        if (off..off + d).contains(&j) {
            (0..d).map(|k| half[i][off + k] * t[j - off][k]).sum()
        } else {
            half[i][j]
        }
    });
    let pf = match opts.precision {
        Precision::Double => pfaffian(&sub)?,
        Precision::Extended => lower(pfaffian(&sub.cast::<DoubleDouble>())?),
    };
    Ok(assembled_prefactor(n_pairs, p.k1(), p.k2(), parity) * pf / p.sqrt_berezinian())
}
