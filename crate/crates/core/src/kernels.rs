//! Kernels built from the moment matrix and the Pfaffian formulas for
//!
//! `Z_(k₁/k₂)(κ) = ∫ h(z_n) Π_j g(z_{2j-1}, z_{2j}) Δ_n(z) Π_{a,b} (z_a - κ_{b2}) / (κ_{b1} - z_a) dz`
//!
//! with `n = 2N+1` variables (odd case, one-point density `h`) or `n = 2N`
//! (even case, no `h`). Row conventions:
//!
//! * `K(κ) = (1, κ, …, κ^{d-1} [, 0])`,
//! * `G(κ) = (⟨1/(κ-x), x^{b-1}⟩_{b≤d} [, -∫h/(κ-x)])`,
//! * `F(κa, κb) = ⟨1/(κa-x), 1/(κb-x)⟩`,
//!
//! the bracketed border entries present in the odd case only.
//! `K₁₁ = K M⁻¹ Kᵀ`, `K₁₂(κ₁,κ₂) = 1/(κ₁-κ₂) + K(κ₂) M⁻¹ G(κ₁)ᵀ`,
//! `K₂₂ = F + G M⁻¹ Gᵀ`. Pfaffians use the standard sign convention and
//! `√Ber = Δ(κ₁)Δ(κ₂)/Π(κ_{a1}-κ_{b2})`.

use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{PairMeasure, TestFn};
use crate::error::{PfrmtError, Result};
use crate::scalar::{factorial, lift, lower, sign_pow, DoubleDouble, Precision, Real};
use crate::skew_linalg::{pfaffian, skew_inverse, DenseMatrix, SkewMatrix, SpectralParams};

/// Which master integral: odd (`2N+1` variables, with `h`) or even (`2N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of_vars(n: usize) -> Parity {
        if n % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// Number of integration variables for `N` pairs.
    pub fn vars(self, n_pairs: usize) -> usize {
        2 * n_pairs + self.offset()
    }

    fn offset(self) -> usize {
        match self {
            Parity::Odd => 1,
            Parity::Even => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `d > 0`, `k₁+k₂` even: Pfaffian of two-point functions.
    #[serde(rename = "even-sum")]
    EvenSum,
    /// `d > 0`, `k₁+k₂` odd: bordered kernel Pfaffian with one-point functions.
    #[serde(rename = "odd-sum")]
    OddSum,
    /// `d ≤ 0`: sparse Pfaffian without any moment matrix.
    #[serde(rename = "sparse")]
    Sparse,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::EvenSum => "even-sum",
            Regime::OddSum => "odd-sum",
            Regime::Sparse => "sparse",
        }
    }
}

/// `d = k₂ - k₁ + n` and the regime it selects.
pub fn dispatch(k1: usize, k2: usize, n_vars: usize) -> (Regime, i64) {
    let d = k2 as i64 - k1 as i64 + n_vars as i64;
    let regime = if d <= 0 {
        Regime::Sparse
    } else if (k1 + k2) % 2 == 0 {
        Regime::EvenSum
    } else {
        Regime::OddSum
    };
    (regime, d)
}

/// Evaluation switches.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalOptions {
    pub precision: Precision,
    /// Fault injection for the verification suite: negates the prefactor of
    /// the even-sum formula.
    #[serde(default)]
    pub flip_even_sum_sign: bool,
}

impl EvalOptions {
    pub fn with_precision(precision: Precision) -> Self {
        EvalOptions { precision, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Dimension of the outermost Pfaffian.
    pub pfaffian_dim: usize,
    /// Reciprocal condition estimate of the moment matrix, when one was inverted.
    pub moment_rcond: Option<f64>,
    /// `max |M M⁻¹ - I|`, when a moment matrix was inverted.
    pub inverse_residual: Option<f64>,
    pub precision: Precision,
    pub elapsed_ms: f64,
    /// `(-1)^{χ k₁}` applied when converting to a β=1 matrix average.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_k1_sign: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZResult {
    pub value: Complex64,
    pub regime: Regime,
    pub d: i64,
    pub diagnostics: Diagnostics,
}

fn pf_in(m: &SkewMatrix<f64>, precision: Precision) -> Result<Complex64> {
    match precision {
        Precision::Double => pfaffian(m),
        Precision::Extended => Ok(lower(pfaffian(&m.cast::<DoubleDouble>())?)),
    }
}

/// `K(κ)`: powers `κ^{b-1}`, `b ≤ d`, plus a trailing zero when bordered.
pub fn build_k_row(d: usize, kappa: Complex64, bordered: bool) -> Vec<Complex64> {
    let mut row = Vec::with_capacity(d + 1);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..d {
        row.push(p);
        p *= kappa;
    }
    if bordered {
        row.push(Complex64::new(0.0, 0.0));
    }
    row
}

/// `G(κ)`; bordered (with `-∫h/(κ-x)` appended) when `d` is odd and the
/// measure has a one-point density.
pub fn build_g(m: &dyn PairMeasure, d: usize, kappa: Complex64) -> Result<Vec<Complex64>> {
    g_row(m, d, kappa, d % 2 == 1 && m.has_single())
}

fn g_row(m: &dyn PairMeasure, d: usize, kappa: Complex64, bordered: bool) -> Result<Vec<Complex64>> {
    let monos: Vec<TestFn> = (0..d as u32).map(TestFn::Monomial).collect();
    let mut row = m.pair_row(&TestFn::Cauchy(kappa), &monos)?;
    if bordered {
        row.push(-m.single(&TestFn::Cauchy(kappa))?);
    }
    Ok(row)
}

fn moment_layout(m: &dyn PairMeasure, d: usize, bordered: bool) -> Result<SkewMatrix<f64>> {
    let mm = m.moment_matrix(d)?;
    if mm.bordered == bordered {
        return Ok(mm.matrix);
    }
    // Re-layout: the measure's own convention borders odd d only.
    let n = d + usize::from(bordered);
    let mut out = SkewMatrix::zeros(n);
    for a in 0..d {
        for b in a + 1..d {
            out.set(a, b, mm.matrix.get(a, b));
        }
        if bordered {
            out.set(a, d, -m.single(&TestFn::Monomial(a as u32))?);
        }
    }
    Ok(out)
}

/// Moment matrix with its inverse and the kernels built on them.
pub struct KernelSet<'m> {
    measure: &'m dyn PairMeasure,
    d: usize,
    bordered: bool,
    precision: Precision,
    moment: SkewMatrix<f64>,
    minv: SkewMatrix<f64>,
    minv_ext: Option<SkewMatrix<DoubleDouble>>,
    pf_moment: Complex64,
    rcond: f64,
    residual: f64,
}

impl<'m> KernelSet<'m> {
    /// Builds `M_(d)` (bordered when `parity` is odd) and inverts it. The
    /// bordered matrix must be even-dimensional, i.e. `d` odd for the odd
    /// case and even for the even case.
    pub fn new(measure: &'m dyn PairMeasure, d: usize, parity: Parity, precision: Precision) -> Result<Self> {
        let bordered = parity == Parity::Odd;
        if bordered && !measure.has_single() {
            return Err(PfrmtError::Regime("odd-case kernels need a one-point density".into()));
        }
        if (d + usize::from(bordered)) % 2 == 1 {
            return Err(PfrmtError::Dimension(format!("kernel set needs an even moment block, got d={d} ({parity:?})")));
        }
        let moment = moment_layout(measure, d, bordered)?;
        let (minv, minv_ext, pf_moment, rcond, residual) = match precision {
            Precision::Double => {
                let inv = skew_inverse(&moment)?;
                (inv.inverse, None, pfaffian(&moment)?, inv.rcond, inv.residual)
            }
            Precision::Extended => {
                let mx = moment.cast::<DoubleDouble>();
                let inv = skew_inverse(&mx)?;
                (inv.inverse.cast::<f64>(), Some(inv.inverse), lower(pfaffian(&mx)?), inv.rcond, inv.residual)
            }
        };
        // A backward-stable inverse leaves a residual of order eps / rcond.
        let eps = match precision {
            Precision::Double => f64::EPSILON,
            Precision::Extended => DoubleDouble::EPS,
        };
        if !(residual <= (1e3 * eps / rcond).max(1e-10 * eps / f64::EPSILON)) {
            return Err(PfrmtError::SingularMatrix { rcond });
        }
        Ok(KernelSet { measure, d, bordered, precision, moment, minv, minv_ext, pf_moment, rcond, residual })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn moment(&self) -> &SkewMatrix<f64> {
        &self.moment
    }

    pub fn minv(&self) -> &SkewMatrix<f64> {
        &self.minv
    }

    pub fn pf_moment(&self) -> Complex64 {
        self.pf_moment
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn inverse_residual(&self) -> f64 {
        self.residual
    }

    pub fn k_row(&self, kappa: Complex64) -> Vec<Complex64> {
        build_k_row(self.d, kappa, self.bordered)
    }

    pub fn g_row(&self, kappa: Complex64) -> Result<Vec<Complex64>> {
        g_row(self.measure, self.d, kappa, self.bordered)
    }

    /// `u M⁻¹ vᵀ`.
    pub fn bilinear(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let n = self.minv.dim();
        match &self.minv_ext {
            None => {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let mut s = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        s += self.minv.get(i, j) * v[j];
                    }
                    acc += u[i] * s;
                }
                acc
            }
            Some(mx) => {
                let uu: Vec<_> = u.iter().map(|&z| lift::<DoubleDouble>(z)).collect();
                let vv: Vec<_> = v.iter().map(|&z| lift::<DoubleDouble>(z)).collect();
                let mut acc = lift::<DoubleDouble>(Complex64::new(0.0, 0.0));
                for i in 0..n {
                    let mut s = lift::<DoubleDouble>(Complex64::new(0.0, 0.0));
                    for j in 0..n {
                        s = s + mx.get(i, j) * vv[j];
                    }
                    acc = acc + uu[i] * s;
                }
                lower(acc)
            }
        }
    }

    pub fn k11(&self, ka: Complex64, kb: Complex64) -> Complex64 {
        if ka == kb {
            return Complex64::new(0.0, 0.0);
        }
        self.bilinear(&self.k_row(ka), &self.k_row(kb))
    }

    pub fn k12(&self, kb1: Complex64, ka2: Complex64) -> Result<Complex64> {
        if kb1 == ka2 {
            return Err(PfrmtError::DegenerateShift(format!("K12 pole at {kb1}")));
        }
        Ok(1.0 / (kb1 - ka2) + self.bilinear(&self.k_row(ka2), &self.g_row(kb1)?))
    }

    pub fn k22(&self, ka1: Complex64, kb1: Complex64) -> Result<Complex64> {
        if ka1 == kb1 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let f = self.measure.pair(&TestFn::Cauchy(ka1), &TestFn::Cauchy(kb1))?;
        Ok(f + self.bilinear(&self.g_row(ka1)?, &self.g_row(kb1)?))
    }

    fn precision(&self) -> Precision {
        self.precision
    }
}

pub fn kernel_k11(ks: &KernelSet, ka: Complex64, kb: Complex64) -> Complex64 {
    ks.k11(ka, kb)
}

pub fn kernel_k12(ks: &KernelSet, kb1: Complex64, ka2: Complex64) -> Result<Complex64> {
    ks.k12(kb1, ka2)
}

pub fn kernel_k22(ks: &KernelSet, ka1: Complex64, kb1: Complex64) -> Result<Complex64> {
    ks.k22(ka1, kb1)
}

/// `⌊v/2⌋!`, the factorial attached to a `v`-variable integral.
fn fz(v: i64) -> f64 {
    factorial((v / 2) as usize)
}

fn check_params(m: &dyn PairMeasure, p: &SpectralParams, parity: Parity) -> Result<()> {
    p.validate()?;
    if parity == Parity::Odd && !m.has_single() {
        return Err(PfrmtError::Regime(
            "the odd-size integral needs a one-point density; this measure only has pair densities".into(),
        ));
    }
    Ok(())
}

/// Matrix of the assembled route for `d ≥ 0`: blocks `(κ₂ | κ₁ | M)` with
/// `(κ₂,κ₁) = 1/(κ_{b1}-κ_{a2})`, `(κ₂,M) = K`, `(κ₁,κ₁) = F`,
/// `(κ₁,M) = G`, and `M_(d)` (bordered in the odd case).
pub fn assembled_matrix(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
) -> Result<SkewMatrix<f64>> {
    let (k1, k2) = (p.k1(), p.k2());
    let (_, d) = dispatch(k1, k2, parity.vars(n_pairs));
    if d < 0 {
        return Err(PfrmtError::Regime(format!("assembled layout needs d >= 0, got {d}")));
    }
    let d = d as usize;
    let bordered = parity == Parity::Odd;
    let mom = moment_layout(m, d, bordered)?;
    let nm = mom.dim();
    let s = k2 + k1 + nm;
    let mut a = SkewMatrix::zeros(s);
    let (o1, om) = (k2, k2 + k1);
    for (i, &x) in p.kappa2.iter().enumerate() {
        for (j, &y) in p.kappa1.iter().enumerate() {
            a.set(i, o1 + j, 1.0 / (y - x));
        }
        for (j, v) in build_k_row(d, x, bordered).into_iter().enumerate() {
            a.set(i, om + j, v);
        }
    }
    for (i, &x) in p.kappa1.iter().enumerate() {
        for (j, &y) in p.kappa1.iter().enumerate().skip(i + 1) {
            a.set(o1 + i, o1 + j, m.pair(&TestFn::Cauchy(x), &TestFn::Cauchy(y))?);
        }
        for (j, v) in g_row(m, d, x, bordered)?.into_iter().enumerate() {
            a.set(o1 + i, om + j, v);
        }
    }
    for i in 0..nm {
        for j in i + 1..nm {
            a.set(om + i, om + j, mom.get(i, j));
        }
    }
    Ok(a)
}

/// Sign and scale of the assembled route: `Z = prefactor × Pf / √Ber`.
pub fn assembled_prefactor(n_pairs: usize, k1: usize, k2: usize, parity: Parity) -> f64 {
    let n = n_pairs as i64;
    let (k1, k2) = (k1 as i64, k2 as i64);
    let base = match parity {
        Parity::Odd => sign_pow(n + 1 + k1),
        Parity::Even => sign_pow(n),
    };
    base * sign_pow(k1 * (k1 + k2)) * factorial(n_pairs)
}

/// Block sizes of the sparse layout, in order `(κ₂, h, monomials, κ₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseBlocks {
    pub k2: usize,
    pub h: usize,
    pub mono: usize,
    pub k1: usize,
}

/// Sparse matrix for `d ≤ 0`: only the `(·, κ₁)` column blocks and the
/// `F` block are occupied. Rows `(κ₂)`: `1/(κ_{b1}-κ_{a2})`; row `h`:
/// `∫h/(κ_{b1}-z)`; monomial rows: `κ_{b1}^{a-1}`.
pub fn sparse_matrix(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
) -> Result<(SkewMatrix<f64>, SparseBlocks)> {
    let (k1, k2) = (p.k1(), p.k2());
    let (_, d) = dispatch(k1, k2, parity.vars(n_pairs));
    if d > 0 {
        return Err(PfrmtError::Regime(format!("sparse layout needs d <= 0, got {d}")));
    }
    let blocks = SparseBlocks { k2, h: parity.offset(), mono: (-d) as usize, k1 };
    let o1 = k2 + blocks.h + blocks.mono;
    let s = o1 + k1;
    let mut a = SkewMatrix::zeros(s);
    for (b, &y) in p.kappa1.iter().enumerate() {
        for (i, &x) in p.kappa2.iter().enumerate() {
            a.set(i, o1 + b, 1.0 / (y - x));
        }
        if blocks.h == 1 {
            a.set(k2, o1 + b, m.single(&TestFn::Cauchy(y))?);
        }
        let mut pw = Complex64::new(1.0, 0.0);
        for i in 0..blocks.mono {
            a.set(k2 + blocks.h + i, o1 + b, pw);
            pw *= y;
        }
        for (c, &z) in p.kappa1.iter().enumerate().skip(b + 1) {
            a.set(o1 + b, o1 + c, m.pair(&TestFn::Cauchy(y), &TestFn::Cauchy(z))?);
        }
    }
    Ok((a, blocks))
}

/// True when every block outside the `(·, κ₁)` columns and the `F` corner
/// is exactly zero.
pub fn check_sparse_structure(a: &SkewMatrix<f64>, blocks: &SparseBlocks) -> bool {
    let o1 = blocks.k2 + blocks.h + blocks.mono;
    (0..o1).all(|i| (0..o1).all(|j| a.get(i, j) == Complex64::new(0.0, 0.0)))
}

/// Direct route: one Pfaffian of the assembled (`d ≥ 0`) or sparse
/// (`d ≤ 0`) matrix, no inverse anywhere.
pub fn z_assembled(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
    opts: &EvalOptions,
) -> Result<ZResult> {
    check_params(m, p, parity)?;
    let t0 = Instant::now();
    let (regime, d) = dispatch(p.k1(), p.k2(), parity.vars(n_pairs));
    let (value, dim) = if d >= 0 {
        let a = assembled_matrix(m, n_pairs, p, parity)?;
        let pf = pf_in(&a, opts.precision)?;
        (assembled_prefactor(n_pairs, p.k1(), p.k2(), parity) * pf / p.sqrt_berezinian(), a.dim())
    } else {
        let (v, dim) = sparse_value(m, n_pairs, p, parity, opts)?;
        (v, dim)
    };
    Ok(ZResult {
        value,
        regime,
        d,
        diagnostics: Diagnostics {
            pfaffian_dim: dim,
            precision: opts.precision,
            elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
            ..Default::default()
        },
    })
}

fn sparse_value(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
    opts: &EvalOptions,
) -> Result<(Complex64, usize)> {
    let (a, blocks) = sparse_matrix(m, n_pairs, p, parity)?;
    if !check_sparse_structure(&a, &blocks) {
        return Err(PfrmtError::Regime("sparse matrix has occupied off-blocks".into()));
    }
    let sign = match parity {
        Parity::Even => sign_pow(n_pairs as i64),
        Parity::Odd => sign_pow((n_pairs + p.k2()) as i64),
    };
    let pf = pf_in(&a, opts.precision)?;
    Ok((sign * factorial(n_pairs) * pf / p.sqrt_berezinian(), a.dim()))
}

/// Kernel route for `d > 0`, `k₁+k₂` even:
/// `Z = σ N! Pf(M) Pf(A + B M⁻¹ Bᵀ) / √Ber` with `A = [[0, 1/(κ_{b1}-κ_{a2})], [·, F]]`
/// and `B = [K(κ₂); G(κ₁)]`, i.e. `Pf(M)` times the Pfaffian of the kernel
/// matrix `[[K₁₁, K₁₂], [-K₁₂ᵀ, K₂₂]]`; `σ = (-1)^{N+1+k₁}` (odd) or `(-1)^N` (even).
pub fn z_kernel_route(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
    opts: &EvalOptions,
) -> Result<ZResult> {
    check_params(m, p, parity)?;
    let t0 = Instant::now();
    let (k1, k2) = (p.k1(), p.k2());
    let (regime, d) = dispatch(k1, k2, parity.vars(n_pairs));
    if regime != Regime::EvenSum {
        return Err(PfrmtError::Regime(format!("kernel route needs d > 0 and k1+k2 even (d={d})")));
    }
    let ks = KernelSet::new(m, d as usize, parity, opts.precision)?;
    let kr: Vec<Vec<Complex64>> = p.kappa2.iter().map(|&x| ks.k_row(x)).collect();
    let gr: Vec<Vec<Complex64>> = p.kappa1.iter().map(|&x| ks.g_row(x)).collect::<Result<_>>()?;
    let kern = SkewMatrix::from_upper(k2 + k1, |i, j| match (i < k2, j < k2) {
        (true, true) => ks.bilinear(&kr[i], &kr[j]),
        (true, false) => {
            let b = j - k2;
            1.0 / (p.kappa1[b] - p.kappa2[i]) + ks.bilinear(&kr[i], &gr[b])
        }
        _ => {
            let (a, b) = (i - k2, j - k2);
            let f = m.pair(&TestFn::Cauchy(p.kappa1[a]), &TestFn::Cauchy(p.kappa1[b])).unwrap_or(Complex64::new(f64::NAN, 0.0));
            f + ks.bilinear(&gr[a], &gr[b])
        }
    });
    if !kern.is_finite() {
        // Surface the underlying reduction error.
        for a in 0..k1 {
            for b in a + 1..k1 {
                m.pair(&TestFn::Cauchy(p.kappa1[a]), &TestFn::Cauchy(p.kappa1[b]))?;
            }
        }
        return Err(PfrmtError::Numeric("non-finite kernel matrix".into()));
    }
    let sigma = match parity {
        Parity::Odd => sign_pow((n_pairs + 1 + k1) as i64),
        Parity::Even => sign_pow(n_pairs as i64),
    };
    let value = sigma * factorial(n_pairs) * ks.pf_moment() * pf_in(&kern, ks.precision())? / p.sqrt_berezinian();
    Ok(ZResult {
        value,
        regime,
        d,
        diagnostics: Diagnostics {
            pfaffian_dim: kern.dim(),
            moment_rcond: Some(ks.rcond()),
            inverse_residual: Some(ks.inverse_residual()),
            precision: opts.precision,
            elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
            ..Default::default()
        },
    })
}

fn params(k1: &[Complex64], k2: &[Complex64]) -> SpectralParams {
    SpectralParams { kappa1: k1.to_vec(), kappa2: k2.to_vec() }
}

/// `Z^{(v)}` for a small number of shifts by the direct route, where `v`
/// counts integration variables (same parity as the caller).
fn z_small(m: &dyn PairMeasure, v: i64, k1: &[Complex64], k2: &[Complex64], opts: &EvalOptions) -> Result<Complex64> {
    let parity = Parity::of_vars(v as usize);
    Ok(z_assembled(m, (v / 2) as usize, &params(k1, k2), parity, opts)?.value)
}

/// Pfaffian formula for `Z`, dispatched on `d = k₂ - k₁ + n`:
/// even-sum (`d > 0`, `k₁+k₂` even) from two-point functions, odd-sum
/// (`d > 0`, `k₁+k₂` odd) from kernels at `d+1` bordered by one-point
/// functions, sparse (`d ≤ 0`) without a moment matrix.
pub fn z_pfaffian(m: &dyn PairMeasure, n_pairs: usize, p: &SpectralParams, parity: Parity) -> Result<ZResult> {
    z_pfaffian_with(m, n_pairs, p, parity, &EvalOptions::default())
}

pub fn z_pfaffian_with(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
    opts: &EvalOptions,
) -> Result<ZResult> {
    check_params(m, p, parity)?;
    let t0 = Instant::now();
    let (k1, k2) = (p.k1(), p.k2());
    let (regime, d) = dispatch(k1, k2, parity.vars(n_pairs));
    let mut diag = Diagnostics { precision: opts.precision, ..Default::default() };
    let value = match regime {
        Regime::Sparse => {
            let (v, dim) = sparse_value(m, n_pairs, p, parity, opts)?;
            diag.pfaffian_dim = dim;
            v
        }
        Regime::EvenSum => even_sum(m, n_pairs, p, parity, d, opts, &mut diag)?,
        Regime::OddSum => odd_sum(m, n_pairs, p, parity, d, opts, &mut diag)?,
    };
    diag.elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(ZResult { value, regime, d, diagnostics: diag })
}

/// Memo of two-point functions keyed by argument bit patterns.
#[derive(Default)]
struct TwoPoint {
    memo: HashMap<(u8, [u64; 4]), Complex64>,
}

fn bits(a: Complex64, b: Complex64) -> [u64; 4] {
    [a.re.to_bits(), a.im.to_bits(), b.re.to_bits(), b.im.to_bits()]
}

impl TwoPoint {
    fn get(
        &mut self,
        m: &dyn PairMeasure,
        tag: u8,
        v: i64,
        k1: &[Complex64],
        k2: &[Complex64],
        opts: &EvalOptions,
    ) -> Result<Complex64> {
        let key_args = match (k1, k2) {
            ([a, b], []) | ([a], [b]) | ([], [a, b]) => bits(*a, *b),
            _ => unreachable!("two-point arguments"),
        };
        if let Some(v) = self.memo.get(&(tag, key_args)) {
            return Ok(*v);
        }
        let z = z_small(m, v, k1, k2, opts)?;
        self.memo.insert((tag, key_args), z);
        Ok(z)
    }
}

fn even_sum(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
    d: i64,
    opts: &EvalOptions,
    diag: &mut Diagnostics,
) -> Result<Complex64> {
    let (k1, k2) = (p.k1(), p.k2());
    let (k1i, k2i) = (k1 as i64, k2 as i64);
    let off = parity.offset() as i64;
    let mut memo = TwoPoint::default();
    let mut a = SkewMatrix::zeros(k2 + k1);
    for i in 0..k2 {
        for j in i + 1..k2 {
            let (x, y) = (p.kappa2[i], p.kappa2[j]);
            let v = if d - 2 >= off {
                (y - x) * memo.get(m, 0, d - 2, &[], &[x, y], opts)? / fz(d - 2)
            } else {
                Complex64::new(0.0, 0.0)
            };
            a.set(i, j, v);
        }
        for b in 0..k1 {
            let (x, y) = (p.kappa2[i], p.kappa1[b]);
            a.set(i, k2 + b, memo.get(m, 1, d, &[y], &[x], opts)? / (fz(d) * (y - x)));
        }
    }
    for i in 0..k1 {
        for j in i + 1..k1 {
            let (x, y) = (p.kappa1[i], p.kappa1[j]);
            a.set(k2 + i, k2 + j, (y - x) * memo.get(m, 2, d + 2, &[x, y], &[], opts)? / fz(d + 2));
        }
    }
    // (-1)^N Pf M_(d) from the smallest direct integral: Z_(0/0)^{(d)}.
    let base_pf = {
        let mom = moment_layout(m, d as usize, parity == Parity::Odd)?;
        pf_in(&mom, opts.precision)?
    };
    let n = n_pairs as i64;
    let base = sign_pow(n) * base_pf;
    let q = (k2i * k2i - k1i * k1i) / 4;
    let mut sign = match parity {
        Parity::Odd => sign_pow(q + (k2i - k1i) / 2 + k1i + 1),
        Parity::Even => sign_pow(q),
    };
    if opts.flip_even_sum_sign {
        sign = -sign;
    }
    let power = 1 - (k1i + k2i) / 2;
    diag.pfaffian_dim = a.dim();
    let scale = base.powi(power as i32);
    Ok(sign * factorial(n_pairs) * scale * pf_in(&a, opts.precision)? / p.sqrt_berezinian())
}

fn odd_sum(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
    d: i64,
    opts: &EvalOptions,
    diag: &mut Diagnostics,
) -> Result<Complex64> {
    let (k1, k2) = (p.k1(), p.k2());
    let dt = d + 1;
    let off = parity.offset() as i64;
    let ks = KernelSet::new(m, dt as usize, parity, opts.precision)?;
    diag.moment_rcond = Some(ks.rcond());
    diag.inverse_residual = Some(ks.inverse_residual());
    let kr: Vec<Vec<Complex64>> = p.kappa2.iter().map(|&x| ks.k_row(x)).collect();
    let gr: Vec<Vec<Complex64>> = p.kappa1.iter().map(|&x| ks.g_row(x)).collect::<Result<_>>()?;
    // One-point borders; the odd case carries the opposite sign on the κ₁ border.
    let mut u2 = Vec::with_capacity(k2);
    for &x in &p.kappa2 {
        u2.push(if dt - 2 >= off {
            z_small(m, dt - 2, &[], &[x], opts)? / fz(dt - 2)
        } else {
            Complex64::new(0.0, 0.0)
        });
    }
    let border_sign = match parity {
        Parity::Odd => -1.0,
        Parity::Even => 1.0,
    };
    let mut w1 = Vec::with_capacity(k1);
    for &x in &p.kappa1 {
        w1.push(border_sign * z_small(m, dt, &[x], &[], opts)? / fz(dt));
    }
    let s = 1 + k2 + k1;
    let mut a = SkewMatrix::zeros(s);
    for b in 0..k2 {
        a.set(0, 1 + b, -u2[b]);
    }
    for b in 0..k1 {
        a.set(0, 1 + k2 + b, -w1[b]);
    }
    for i in 0..k2 {
        for j in i + 1..k2 {
            a.set(1 + i, 1 + j, ks.bilinear(&kr[i], &kr[j]));
        }
        for b in 0..k1 {
            a.set(1 + i, 1 + k2 + b, 1.0 / (p.kappa1[b] - p.kappa2[i]) + ks.bilinear(&kr[i], &gr[b]));
        }
    }
    for i in 0..k1 {
        for j in i + 1..k1 {
            let f = m.pair(&TestFn::Cauchy(p.kappa1[i]), &TestFn::Cauchy(p.kappa1[j]))?;
            a.set(1 + k2 + i, 1 + k2 + j, f + ks.bilinear(&gr[i], &gr[j]));
        }
    }
    diag.pfaffian_dim = s;
    let e = (k1 + k2).div_ceil(2) as i64;
    let sign = match parity {
        Parity::Even => sign_pow(e),
        Parity::Odd => sign_pow(e + k1 as i64),
    };
    Ok(sign * factorial(n_pairs) * pf_in(&a, opts.precision)? / p.sqrt_berezinian())
}

/// Max relative deviation of each kernel relation over a κ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConsistency {
    pub d: usize,
    pub k11_max_rel: f64,
    pub k12_max_rel: f64,
    pub k22_max_rel: f64,
    pub points: usize,
}

impl KernelConsistency {
    pub fn max_rel(&self) -> f64 {
        self.k11_max_rel.max(self.k12_max_rel).max(self.k22_max_rel)
    }
}

/// Kernels as normalized two- and one-shift integrals, for the moment
/// block of size `d` (odd `d` in the odd case, even `d` in the even case),
/// `P = (-1)^{⌊d/2⌋} Pf M_(d)` and `v! ≡ ⌊v/2⌋!` for a `v`-variable integral:
///
/// * `K₁₁(x,y) = ± (x-y) Z_(0/2)^{(d-2)}(x,y) / ((d-2)! P)`
/// * `K₁₂(κ₁,κ₂) = Z_(1/1)^{(d)}(κ₁;κ₂) / ((κ₁-κ₂) d! P)`
/// * `K₂₂(x,y) = ± (x-y) Z_(2/0)^{(d+2)}(x,y) / ((d+2)! P)`
///
/// with `+` in the odd case and `-` in the even case.
pub struct KernelRelations;

impl KernelRelations {
    fn norm(ks: &KernelSet) -> Complex64 {
        sign_pow((ks.d() / 2) as i64) * ks.pf_moment()
    }

    fn sign(parity: Parity) -> f64 {
        match parity {
            Parity::Odd => 1.0,
            Parity::Even => -1.0,
        }
    }

    pub fn k11(m: &dyn PairMeasure, ks: &KernelSet, parity: Parity, x: Complex64, y: Complex64, opts: &EvalOptions) -> Result<Complex64> {
        let v = ks.d() as i64 - 2;
        let z = z_small(m, v, &[], &[x, y], opts)?;
        Ok(Self::sign(parity) * (x - y) * z / (fz(v) * Self::norm(ks)))
    }

    pub fn k12(m: &dyn PairMeasure, ks: &KernelSet, _parity: Parity, x1: Complex64, y2: Complex64, opts: &EvalOptions) -> Result<Complex64> {
        let v = ks.d() as i64;
        let z = z_small(m, v, &[x1], &[y2], opts)?;
        Ok(z / ((x1 - y2) * fz(v) * Self::norm(ks)))
    }

    pub fn k22(m: &dyn PairMeasure, ks: &KernelSet, parity: Parity, x: Complex64, y: Complex64, opts: &EvalOptions) -> Result<Complex64> {
        let v = ks.d() as i64 + 2;
        let z = z_small(m, v, &[x, y], &[], opts)?;
        Ok(Self::sign(parity) * (x - y) * z / (fz(v) * Self::norm(ks)))
    }
}

/// Evaluates both sides of the three kernel relations on `grid × grid`
/// (pairs with distinct points) for `n_pairs` pairs; the moment block is
/// `d = 2N+1` (odd case) or `d = 2N` (even case, `N ≥ 1`).
pub fn kernel_consistency(
    m: &dyn PairMeasure,
    n_pairs: usize,
    parity: Parity,
    grid: &[Complex64],
    opts: &EvalOptions,
) -> Result<KernelConsistency> {
    let d = parity.vars(n_pairs);
    if d == 0 {
        return Err(PfrmtError::Dimension("kernel relations need at least one pair in the even case".into()));
    }
    let ks = KernelSet::new(m, d, parity, opts.precision)?;
    let rel = |a: Complex64, b: Complex64| crate::scalar::rel_dev(a, b);
    let (mut r11, mut r12, mut r22, mut pts) = (0.0f64, 0.0f64, 0.0f64, 0);
    for (i, &x) in grid.iter().enumerate() {
        for (j, &y) in grid.iter().enumerate() {
            if i == j {
                continue;
            }
            pts += 1;
            if (d as i64 - 2) >= parity.offset() as i64 {
                r11 = r11.max(rel(ks.k11(x, y), KernelRelations::k11(m, &ks, parity, x, y, opts)?));
            }
            r12 = r12.max(rel(ks.k12(x, y)?, KernelRelations::k12(m, &ks, parity, x, y, opts)?));
            r22 = r22.max(rel(ks.k22(x, y)?, KernelRelations::k22(m, &ks, parity, x, y, opts)?));
        }
    }
    Ok(KernelConsistency { d, k11_max_rel: r11, k12_max_rel: r12, k22_max_rel: r22, points: pts })
}

/// Outcome of approaching an odd-sum value through an extra large shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTrickReport {
    pub target: Complex64,
    pub kappa02: Vec<f64>,
    pub approximants: Vec<Complex64>,
    pub rel_errors: Vec<f64>,
    /// Ratios of successive errors (≈ 10 per decade for first-order convergence).
    pub error_ratios: Vec<f64>,
}

/// `Z_(k₁/k₂) = ∓ lim Z_(k₁/k₂+1)(…, κ₀₂) / κ₀₂^n`, minus sign in the odd case
/// (`n = 2N+1`), plus in the even case (`n = 2N`).
pub fn limit_trick_check(
    m: &dyn PairMeasure,
    n_pairs: usize,
    p: &SpectralParams,
    parity: Parity,
    kappa02: &[f64],
    opts: &EvalOptions,
) -> Result<LimitTrickReport> {
    let target = z_pfaffian_with(m, n_pairs, p, parity, opts)?.value;
    let n = parity.vars(n_pairs) as i32;
    let sign = match parity {
        Parity::Odd => -1.0,
        Parity::Even => 1.0,
    };
    let mut approximants = Vec::new();
    let mut rel_errors = Vec::new();
    for &k0 in kappa02 {
        let mut q = p.clone();
        q.kappa2.push(Complex64::new(k0, 0.0));
        let z = z_pfaffian_with(m, n_pairs, &q, parity, opts)?.value;
        let approx = sign * z / k0.powi(n);
        rel_errors.push((approx - target).norm() / target.norm());
        approximants.push(approx);
    }
    let error_ratios = rel_errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(LimitTrickReport { target, kappa02: kappa02.to_vec(), approximants, rel_errors, error_ratios })
}

/// Conversion of the master integral to the β=1 matrix average over
/// `Ndim × Ndim` real symmetric matrices, `Ndim = 2L + χ`:
///
/// `∫_{E₁≤…≤E_Ndim} Π P(E) |Δ(E)| Π det-ratio = (-1)^{Ndim k₁ + Ndim(Ndim-1)/2} Z / L!`.
pub fn goe_factor(ndim: usize, k1: usize) -> f64 {
    let l = ndim / 2;
    sign_pow((ndim * k1 + ndim * (ndim - 1) / 2) as i64) / factorial(l)
}

/// Unnormalized ordered-eigenvalue integral for β=1,
/// `∫_{E₁≤…≤E_Ndim} Π P(E_a) |Δ(E)| Π_a Π_j (E_a - κ_{j2}) / (E_a - κ_{j1})`.
pub fn z_goe(e: &dyn PairMeasure, ndim: usize, p: &SpectralParams, opts: &EvalOptions) -> Result<ZResult> {
    if ndim == 0 {
        return Err(PfrmtError::Dimension("matrix dimension must be positive".into()));
    }
    let parity = Parity::of_vars(ndim);
    let mut r = z_pfaffian_with(e, ndim / 2, p, parity, opts)?;
    let chi = ndim % 2;
    r.value *= goe_factor(ndim, p.k1());
    r.diagnostics.chi_k1_sign = Some(sign_pow((chi * p.k1()) as i64));
    Ok(r)
}

/// Unnormalized ordered-eigenvalue integral for β=4 over `2N × 2N`
/// self-dual matrices, `∫_{E₁≤…≤E_N} Π P(E_a) Δ(E)⁴ Π_a Π_j (E_a - κ_{j2})² / (E_a - κ_{j1})²`,
/// equal to the even-case master integral divided by `N!`.
pub fn z_gse(e: &dyn PairMeasure, n: usize, p: &SpectralParams, opts: &EvalOptions) -> Result<ZResult> {
    if n == 0 {
        return Err(PfrmtError::Dimension("matrix dimension must be positive".into()));
    }
    let mut r = z_pfaffian_with(e, n, p, Parity::Even, opts)?;
    r.value /= factorial(n);
    Ok(r)
}

/// Dense coupling block `[K(κ₂); G(κ₁)]` of the kernel route, exposed for
/// callers that want to run the Schur identity themselves.
pub fn coupling_block(ks: &KernelSet, p: &SpectralParams) -> Result<DenseMatrix<f64>> {
    let mut rows: Vec<Vec<Complex64>> = p.kappa2.iter().map(|&x| ks.k_row(x)).collect();
    for &x in &p.kappa1 {
        rows.push(ks.g_row(x)?);
    }
    let cols = ks.minv().dim();
    Ok(DenseMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::PointMeasure;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rc(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn measure(seed: u64, odd: bool) -> PointMeasure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = (0..8).map(|_| (rc(&mut rng), rc(&mut rng), rc(&mut rng))).collect();
        let singles = if odd { (0..3).map(|_| (rc(&mut rng), rc(&mut rng))).collect() } else { vec![] };
        PointMeasure { pairs, singles }
    }

    fn shifts(k1: usize, k2: usize) -> SpectralParams {
        let kappa1 = (0..k1).map(|a| c(0.3 + 0.4 * a as f64, 1.7 + 0.3 * a as f64)).collect();
        let kappa2 = (0..k2).map(|b| c(-0.6 + 0.5 * b as f64, -1.5 - 0.2 * b as f64)).collect();
        SpectralParams::new(kappa1, kappa2).unwrap()
    }

    fn cases() -> Vec<(usize, usize, usize, Parity)> {
        let mut v = Vec::new();
        for parity in [Parity::Odd, Parity::Even] {
            for n in 0..=2 {
                for k1 in 0..=3 {
                    for k2 in 0..=3 {
                        v.push((n, k1, k2, parity));
                    }
                }
            }
        }
        v
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-3)
    }

    #[test]
    fn assembled_matches_brute_force() {
        let opts = EvalOptions::default();
        for (n, k1, k2, parity) in cases() {
            let m = measure(7 + n as u64, parity == Parity::Odd);
            let p = shifts(k1, k2);
            let z = z_assembled(&m, n, &p, parity, &opts).unwrap().value;
            let b = m.brute_z(n, &p.kappa1, &p.kappa2, parity == Parity::Odd);
            assert!(close(z, b, 1e-10), "N={n} k1={k1} k2={k2} {parity:?}: {z} vs {b}");
        }
    }

    #[test]
    fn pfaffian_formulas_match_brute_force() {
        let opts = EvalOptions::default();
        let mut bad = Vec::new();
        for (n, k1, k2, parity) in cases() {
            let m = measure(11 + n as u64, parity == Parity::Odd);
            let p = shifts(k1, k2);
            let r = z_pfaffian_with(&m, n, &p, parity, &opts).unwrap();
            let b = m.brute_z(n, &p.kappa1, &p.kappa2, parity == Parity::Odd);
            if !close(r.value, b, 1e-9) {
                bad.push(format!("N={n} k1={k1} k2={k2} {parity:?} {:?}: ratio {}", r.regime, r.value / b));
            }
        }
        assert!(bad.is_empty(), "{}", bad.join("\n"));
    }

    #[test]
    fn kernel_route_matches_brute_force() {
        let opts = EvalOptions::default();
        for (n, k1, k2, parity) in cases() {
            if dispatch(k1, k2, parity.vars(n)).0 != Regime::EvenSum {
                continue;
            }
            let m = measure(3, parity == Parity::Odd);
            let p = shifts(k1, k2);
            let z = z_kernel_route(&m, n, &p, parity, &opts).unwrap().value;
            let b = m.brute_z(n, &p.kappa1, &p.kappa2, parity == Parity::Odd);
            assert!(close(z, b, 1e-9), "N={n} k1={k1} k2={k2} {parity:?}: {z} vs {b}");
        }
    }

    #[test]
    fn fault_injection_flips_even_sum_value() {
        let m = measure(5, true);
        let p = shifts(2, 2);
        let good = z_pfaffian_with(&m, 1, &p, Parity::Odd, &EvalOptions::default()).unwrap();
        let bad = z_pfaffian_with(&m, 1, &p, Parity::Odd, &EvalOptions { flip_even_sum_sign: true, ..Default::default() }).unwrap();
        assert_eq!(good.regime, Regime::EvenSum);
        assert!(close(bad.value, -good.value, 1e-14));
    }

    #[test]
    fn kernel_relations_hold_for_point_measures() {
        let grid = [c(0.2, 1.1), c(-0.4, 0.9), c(0.7, -1.3)];
        let opts = EvalOptions::default();
        for parity in [Parity::Odd, Parity::Even] {
            for n in 0..=2 {
                if parity == Parity::Even && n == 0 {
                    continue;
                }
                let m = measure(21 + n as u64, parity == Parity::Odd);
                let r = kernel_consistency(&m, n, parity, &grid, &opts).unwrap();
                assert!(r.max_rel() < 1e-9, "{parity:?} N={n}: {r:?}");
            }
        }
    }

    #[test]
    fn sparse_layout_has_zero_off_blocks() {
        let m = measure(2, true);
        let p = shifts(3, 0);
        let (a, blocks) = sparse_matrix(&m, 0, &p, Parity::Odd).unwrap();
        assert_eq!(blocks, SparseBlocks { k2: 0, h: 1, mono: 2, k1: 3 });
        assert!(check_sparse_structure(&a, &blocks));
    }

    #[test]
    fn odd_parity_needs_single_density() {
        let m = measure(2, false);
        let err = z_pfaffian(&m, 1, &shifts(1, 1), Parity::Odd).unwrap_err();
        assert_eq!(err.kind(), "RegimeError");
    }

    #[test]
    fn dispatch_is_total() {
        assert_eq!(dispatch(1, 1, 3), (Regime::EvenSum, 3));
        assert_eq!(dispatch(1, 0, 3), (Regime::OddSum, 2));
        assert_eq!(dispatch(3, 0, 3), (Regime::Sparse, 0));
        assert_eq!(dispatch(4, 0, 2), (Regime::Sparse, -2));
    }

    #[test]
    fn extended_precision_agrees_on_point_measure() {
        let m = measure(9, true);
        let p = shifts(2, 1);
        let d = z_pfaffian_with(&m, 2, &p, Parity::Odd, &EvalOptions::default()).unwrap().value;
        let e = z_pfaffian_with(&m, 2, &p, Parity::Odd, &EvalOptions::with_precision(Precision::Extended)).unwrap().value;
        assert!(close(d, e, 1e-10));
    }
}
