use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::{det, DenseMatrix};
use crate::error::{PfrmtError, Result};
use crate::scalar::sign_pow;

/// Shift parameters of a ratio `Π det(H-κ₂) / Π det(H-κ₁)`.
///
/// `kappa1` (denominator) entries must lie off the real axis; both lists must
/// be free of repeats. `kappa2` entries may be any complex numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SpectralParams {
    pub kappa1: Vec<Complex64>,
    pub kappa2: Vec<Complex64>,
}

impl SpectralParams {
    pub fn new(kappa1: Vec<Complex64>, kappa2: Vec<Complex64>) -> Result<Self> {
        let p = SpectralParams { kappa1, kappa2 };
        p.validate()?;
        Ok(p)
    }

    pub fn k1(&self) -> usize {
        self.kappa1.len()
    }

    pub fn k2(&self) -> usize {
        self.kappa2.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, z) in self.kappa1.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(PfrmtError::Numeric(format!("kappa1[{i}] is not finite")));
            }
            if z.im == 0.0 {
                return Err(PfrmtError::OnSupport(format!("kappa1[{i}] has zero imaginary part")));
            }
        }
        for (i, z) in self.kappa2.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(PfrmtError::Numeric(format!("kappa2[{i}] is not finite")));
            }
        }
        for (name, v) in [("kappa1", &self.kappa1), ("kappa2", &self.kappa2)] {
            for i in 0..v.len() {
                for j in 0..i {
                    if v[i] == v[j] {
                        return Err(PfrmtError::DegenerateShift(format!("{name}[{i}] repeats {name}[{j}]")));
                    }
                }
            }
        }
        for (i, a) in self.kappa1.iter().enumerate() {
            for (j, b) in self.kappa2.iter().enumerate() {
                if a == b {
                    return Err(PfrmtError::DegenerateShift(format!("kappa1[{i}] equals kappa2[{j}]")));
                }
            }
        }
        Ok(())
    }

    /// `Δ(κ₁) Δ(κ₂) / Π_{a,b} (κ_{a1} - κ_{b2})` for arbitrary `k₁`, `k₂`.
    pub fn sqrt_berezinian(&self) -> Complex64 {
        let mut den = Complex64::new(1.0, 0.0);
        for a in &self.kappa1 {
            for b in &self.kappa2 {
                den *= a - b;
            }
        }
        vandermonde(&self.kappa1) * vandermonde(&self.kappa2) / den
    }
}

/// `Π_{a<b} (E_a - E_b)`; empty and singleton inputs give 1.
pub fn vandermonde(e: &[Complex64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for a in 0..e.len() {
        for b in a + 1..e.len() {
            v *= e[a] - e[b];
        }
    }
    v
}

/// `(-1)^{N(N-1)/2} det[E_a^{b-1}]`, the determinant form of [`vandermonde`].
pub fn vandermonde_det_form(e: &[Complex64]) -> Complex64 {
    let n = e.len();
    let m = DenseMatrix::from_fn(n, n, |a, b| e[a].powu(b as u32));
    let d = det(&m).expect("square finite matrix");
    sign_pow((n * n.saturating_sub(1) / 2) as i64) * d
}

/// `Δ(κ₁)Δ(κ₂)/Π(κ_{a1} - κ_{b2})` for `k₁ = k₂`, which equals
/// `(-1)^{k(k-1)/2} det[1/(κ_{a1} - κ_{b2})]`.
pub fn sqrt_berezinian_kk(p: &SpectralParams) -> Result<Complex64> {
    if p.k1() != p.k2() {
        return Err(PfrmtError::Dimension(format!(
            "square-root Berezinian needs k1 == k2, got {} and {}",
            p.k1(),
            p.k2()
        )));
    }
    check_disjoint(&p.kappa1, &p.kappa2)?;
    Ok(p.sqrt_berezinian())
}

/// Both sides of the mixed Cauchy–Vandermonde identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedBerezinian {
    /// Ratio form `Δ(κ₁) Δ(κ₂,E) / [Π(κ₁-κ₂) Π(κ₁-E)]`.
    pub ratio: Complex64,
    /// Determinant of the `(k₁+d)` square block: `k₁` Cauchy rows
    /// `1/(κ_{a1} - y_b)` above `d` monomial rows `y_b^{a-1}`, columns `y = (κ₂, E)`.
    pub block_det: Complex64,
    /// Global sign with `block_det = sign × ratio`.
    pub sign: f64,
}

impl MixedBerezinian {
    /// The ratio form carrying the pinned sign, equal to `block_det`.
    pub fn signed(&self) -> Complex64 {
        self.sign * self.ratio
    }
}

/// Mixed square-root Berezinian with monomial rows, `d = k₂ + |E| - k₁ ≥ 0`.
pub fn sqrt_berezinian_mixed(p: &SpectralParams, e: &[Complex64]) -> Result<MixedBerezinian> {
    let k1 = p.k1();
    let ys: Vec<Complex64> = p.kappa2.iter().chain(e).copied().collect();
    if ys.len() < k1 {
        return Err(PfrmtError::Dimension(format!(
            "needs k2 + |E| >= k1, got {} < {k1}",
            ys.len()
        )));
    }
    check_disjoint(&p.kappa1, &ys)?;
    let sign = mixed_sign(k1, p.k2(), e.len());
    let ratio = mixed_ratio(&p.kappa1, &ys);
    let block_det = det(&mixed_block(&p.kappa1, &ys))?;
    Ok(MixedBerezinian { ratio, block_det, sign })
}

fn check_disjoint(x: &[Complex64], y: &[Complex64]) -> Result<()> {
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            if a == b {
                return Err(PfrmtError::DegenerateShift(format!("kappa1[{i}] coincides with column {j}")));
            }
        }
    }
    for v in [x, y] {
        for i in 0..v.len() {
            if v[..i].contains(&v[i]) {
                return Err(PfrmtError::DegenerateShift(format!("repeated argument at position {i}")));
            }
        }
    }
    Ok(())
}

fn mixed_ratio(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let mut den = Complex64::new(1.0, 0.0);
    for a in x {
        for b in y {
            den *= a - b;
        }
    }
    vandermonde(x) * vandermonde(y) / den
}

fn mixed_block(x: &[Complex64], y: &[Complex64]) -> DenseMatrix<f64> {
    let k1 = x.len();
    DenseMatrix::from_fn(y.len(), y.len(), |r, c| {
        if r < k1 {
            1.0 / (x[r] - y[c])
        } else {
            y[c].powu((r - k1) as u32)
        }
    })
}

/// Sign pinned by evaluating both sides at a fixed reference point of the
/// shape `(k₁, k₂, |E|)`. Only the total column count matters.
pub fn mixed_sign(k1: usize, k2: usize, n_e: usize) -> f64 {
    let x: Vec<Complex64> = (0..k1).map(|a| Complex64::new(0.3 * a as f64 - 0.2, 1.0 + 0.25 * a as f64)).collect();
    let y: Vec<Complex64> = (0..k2 + n_e)
        .map(|b| Complex64::new(0.45 * b as f64 - 0.7, -0.15 * b as f64 - 0.35))
        .collect();
    let d = det(&mixed_block(&x, &y)).expect("finite reference block");
    if (d / mixed_ratio(&x, &y)).re >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Closed form of [`mixed_sign`]: `(-1)^{k₁(k₁-1)/2 + d(d-1)/2}`.
pub fn mixed_sign_closed_form(k1: usize, k2: usize, n_e: usize) -> f64 {
    let d = (k2 + n_e) as i64 - k1 as i64;
    let k1 = k1 as i64;
    sign_pow(k1 * (k1 - 1) / 2 + d * (d - 1) / 2)
}
