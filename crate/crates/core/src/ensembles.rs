//! Weights and their reduced integrals.
//!
//! Every quantity the kernels need is a pair integral
//! `⟨f₁, f₂⟩ = ∬ g(x,y) [f₁(x) f₂(y) - f₂(x) f₁(y)]` or a single integral
//! `∫ h(x) f(x)`, with `f` a monomial or a Cauchy factor `1/(κ - x)`.
//!
//! * β=1: `g(x,y) = P(x) P(y) Θ(y - x)` and `h = P`; pair integrals are
//!   ordered double integrals, done as a running inner integral on the outer grid.
//! * β=4: the pair density collapses onto the diagonal and
//!   `⟨f₁, f₂⟩ = ∫ P(x) [f₁'(x) f₂(x) - f₁(x) f₂'(x)] dx`; there is no `h`.
//!
//! Weights: gauss `P(E) = exp(-E²/2)`; laguerre-beta1 `P(x) = x^{(ν-1)/2} e^{-x}`;
//! laguerre-beta4 `P(x) = x^{ν+1} e^{-x}`, all on their natural support.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{PfrmtError, Result};
use crate::quadrature::PanelGrid;
use crate::skew_linalg::SkewMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleId {
    #[serde(rename = "gauss-beta1")]
    GaussBeta1,
    #[serde(rename = "gauss-beta4")]
    GaussBeta4,
    #[serde(rename = "laguerre-beta1")]
    LaguerreBeta1,
    #[serde(rename = "laguerre-beta4")]
    LaguerreBeta4,
}

impl EnsembleId {
    pub const ALL: [EnsembleId; 4] =
        [EnsembleId::GaussBeta1, EnsembleId::GaussBeta4, EnsembleId::LaguerreBeta1, EnsembleId::LaguerreBeta4];

    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleId::GaussBeta1 => "gauss-beta1",
            EnsembleId::GaussBeta4 => "gauss-beta4",
            EnsembleId::LaguerreBeta1 => "laguerre-beta1",
            EnsembleId::LaguerreBeta4 => "laguerre-beta4",
        }
    }

    pub fn beta(self) -> u8 {
        match self {
            EnsembleId::GaussBeta1 | EnsembleId::LaguerreBeta1 => 1,
            EnsembleId::GaussBeta4 | EnsembleId::LaguerreBeta4 => 4,
        }
    }

    pub fn is_gauss(self) -> bool {
        matches!(self, EnsembleId::GaussBeta1 | EnsembleId::GaussBeta4)
    }
}

impl fmt::Display for EnsembleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnsembleId {
    type Err = PfrmtError;

    fn from_str(s: &str) -> Result<Self> {
        EnsembleId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| PfrmtError::Config {
            field: "ensemble".into(),
            message: format!("unknown ensemble `{s}`"),
        })
    }
}

/// A function appearing in a reduced integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFn {
    /// `x^p`.
    Monomial(u32),
    /// `1/(κ - x)`.
    Cauchy(Complex64),
}

impl TestFn {
    #[inline]
    pub fn value(&self, x: f64) -> Complex64 {
        match *self {
            TestFn::Monomial(p) => Complex64::new(x.powi(p as i32), 0.0),
            TestFn::Cauchy(k) => 1.0 / (k - x),
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> Complex64 {
        match *self {
            TestFn::Monomial(0) => Complex64::new(0.0, 0.0),
            TestFn::Monomial(p) => Complex64::new(p as f64 * x.powi(p as i32 - 1), 0.0),
            TestFn::Cauchy(k) => {
                let r = 1.0 / (k - x);
                r * r
            }
        }
    }

    /// Value at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            TestFn::Monomial(p) => z.powu(p),
            TestFn::Cauchy(k) => 1.0 / (k - z),
        }
    }

    fn pole(&self) -> Option<Complex64> {
        match *self {
            TestFn::Monomial(_) => None,
            TestFn::Cauchy(k) => Some(k),
        }
    }
}

/// Source of the pair and single integrals consumed by the kernel formulas.
///
/// Implemented by [`Ensemble`]; any other measure with the same structure
/// (for example a finite sum of point masses) can drive the same formulas.
pub trait PairMeasure: Sync {
    /// `⟨f₁, f₂⟩`, antisymmetric in its arguments.
    fn pair(&self, f1: &TestFn, f2: &TestFn) -> Result<Complex64>;

    /// `∫ h f`; only measures with a one-point density support it.
    fn single(&self, f: &TestFn) -> Result<Complex64>;

    /// Whether [`PairMeasure::single`] is available (odd-size integrals).
    fn has_single(&self) -> bool;

    /// `⟨f₁, g⟩` for every `g` in `f2s`; override to share work across the row.
    fn pair_row(&self, f1: &TestFn, f2s: &[TestFn]) -> Result<Vec<Complex64>> {
        f2s.iter().map(|g| self.pair(f1, g)).collect()
    }

    /// Moment matrix `M_(d)`: entries `⟨x^{a-1}, x^{b-1}⟩`; for odd `d` with a
    /// one-point density, bordered by a last column `-∫h z^{a-1}` (and the
    /// negated row), corner zero.
    fn moment_matrix(&self, d: usize) -> Result<MomentMatrix> {
        let bordered = d % 2 == 1 && self.has_single();
        let n = if bordered { d + 1 } else { d };
        let mut m = SkewMatrix::zeros(n);
        let monos: Vec<TestFn> = (0..d as u32).map(TestFn::Monomial).collect();
        for a in 0..d {
            let row = self.pair_row(&monos[a], &monos[a + 1..])?;
            for (j, v) in row.into_iter().enumerate() {
                m.set(a, a + 1 + j, v);
            }
            if bordered {
                m.set(a, d, -self.single(&monos[a])?);
            }
        }
        Ok(MomentMatrix { d, bordered, matrix: m })
    }
}

/// Antisymmetric moment matrix `M_(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub d: usize,
    /// True when the single-moment border is present (odd `d`, β=1).
    pub bordered: bool,
    pub matrix: SkewMatrix<f64>,
}

/// Discretization of the reduction integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Gauss–Legendre points per panel.
    pub points_per_panel: usize,
    /// Widest panel, in the integration variable.
    pub base_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points_per_panel: 20, base_width: 0.5 }
    }
}

/// A weight with its reductions. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Ensemble {
    id: EnsembleId,
    nu: u32,
    spec: GridSpec,
    /// Pole-free grid, shared by all monomial integrals.
    base: Arc<Sampled>,
}

/// Grid nodes mapped to the eigenvalue variable, with `weight × density`.
#[derive(Debug, Clone)]
struct Sampled {
    grid: PanelGrid,
    x: Vec<f64>,
    /// `ρ(t_i)`, the density in the integration variable.
    rho: Vec<f64>,
}

impl Sampled {
    fn weighted(&self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        self.x.iter().zip(&self.rho).map(|(&x, &r)| f(x) * r).collect()
    }

    fn integrate(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.grid.integrate(&self.weighted(f))
    }
}

/// Half-width of the truncated integration range (gauss in `x`, laguerre in `u = √x`).
const GAUSS_CUTOFF: f64 = 16.0;
const LAGUERRE_CUTOFF: f64 = 14.0;

impl Ensemble {
    pub fn new(id: EnsembleId, nu: u32) -> Result<Self> {
        Self::with_grid(id, nu, GridSpec::default())
    }

    pub fn with_grid(id: EnsembleId, nu: u32, spec: GridSpec) -> Result<Self> {
        if spec.points_per_panel < 4 || !(spec.base_width > 0.0) {
            return Err(PfrmtError::Config {
                field: "quadrature".into(),
                message: "need at least 4 points per panel and a positive width".into(),
            });
        }
        let mut e = Ensemble { id, nu: if id.is_gauss() { 0 } else { nu }, spec, base: Arc::new(empty()) };
        e.base = Arc::new(e.sample(&[]));
        Ok(e)
    }

    pub fn gauss_beta1() -> Self {
        Self::new(EnsembleId::GaussBeta1, 0).expect("default grid is valid")
    }

    pub fn gauss_beta4() -> Self {
        Self::new(EnsembleId::GaussBeta4, 0).expect("default grid is valid")
    }

    pub fn laguerre_beta1(nu: u32) -> Self {
        Self::new(EnsembleId::LaguerreBeta1, nu).expect("default grid is valid")
    }

    pub fn laguerre_beta4(nu: u32) -> Self {
        Self::new(EnsembleId::LaguerreBeta4, nu).expect("default grid is valid")
    }

    pub fn id(&self) -> EnsembleId {
        self.id
    }

    pub fn beta(&self) -> u8 {
        self.id.beta()
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.spec
    }

    /// Same weight with a different discretization.
    pub fn refined(&self, spec: GridSpec) -> Result<Self> {
        Self::with_grid(self.id, self.nu, spec)
    }

    /// The weight `P` on its support (zero outside).
    pub fn weight(&self, x: f64) -> f64 {
        let nu = self.nu as f64;
        match self.id {
            EnsembleId::GaussBeta1 | EnsembleId::GaussBeta4 => (-0.5 * x * x).exp(),
            EnsembleId::LaguerreBeta1 if x > 0.0 => x.powf(0.5 * (nu - 1.0)) * (-x).exp(),
            EnsembleId::LaguerreBeta4 if x >= 0.0 => x.powf(nu + 1.0) * (-x).exp(),
            _ => 0.0,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        if self.id.is_gauss() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (0.0, f64::INFINITY)
        }
    }

    /// Closed form of `∫ P(x) x^s dx`.
    pub fn raw_moment(&self, s: u32) -> f64 {
        let nu = self.nu as f64;
        match self.id {
            EnsembleId::GaussBeta1 | EnsembleId::GaussBeta4 => {
                if s % 2 == 1 {
                    0.0
                } else {
                    let dfact: f64 = (1..s).step_by(2).map(|k| k as f64).product();
                    dfact * (2.0 * PI).sqrt()
                }
            }
            EnsembleId::LaguerreBeta1 => gamma(s as f64 + 0.5 * (nu + 1.0)),
            EnsembleId::LaguerreBeta4 => gamma(s as f64 + nu + 2.0),
        }
    }

    /// Quadrature value of `∫ P(x) x^s dx` on the ensemble grid.
    pub fn raw_moment_quadrature(&self, s: u32) -> f64 {
        self.base.integrate(|x| Complex64::new(x.powi(s as i32), 0.0)).re
    }

    /// `∫ P(E) E^{a-1} dE`, the single-moment border (β=1 only).
    pub fn moment_single(&self, a: u32) -> Result<f64> {
        self.require_single()?;
        if a == 0 {
            return Err(PfrmtError::Dimension("moment index starts at 1".into()));
        }
        Ok(self.raw_moment(a - 1))
    }

    /// Pair moment `⟨E^{a-1}, E^{b-1}⟩`.
    pub fn moment_pair(&self, a: u32, b: u32) -> Result<f64> {
        if a == 0 || b == 0 {
            return Err(PfrmtError::Dimension("moment index starts at 1".into()));
        }
        Ok(self.pair(&TestFn::Monomial(a - 1), &TestFn::Monomial(b - 1))?.re)
    }

    /// `∫ P(E)/(κ - E) dE`.
    pub fn cauchy_single(&self, kappa: Complex64) -> Result<Complex64> {
        self.check_off_support(kappa)?;
        Ok(self.sample(&[kappa]).integrate(|x| 1.0 / (kappa - x)))
    }

    /// `⟨1/(κ - x), x^{b-1}⟩`, the entries of the `G` rows.
    pub fn cauchy_pair(&self, kappa: Complex64, b: u32) -> Result<Complex64> {
        if b == 0 {
            return Err(PfrmtError::Dimension("moment index starts at 1".into()));
        }
        self.pair(&TestFn::Cauchy(kappa), &TestFn::Monomial(b - 1))
    }

    /// `F(κa, κb) = ⟨1/(κa - x), 1/(κb - x)⟩`.
    pub fn f_kernel(&self, ka: Complex64, kb: Complex64) -> Result<Complex64> {
        self.pair(&TestFn::Cauchy(ka), &TestFn::Cauchy(kb))
    }

    pub fn build_moment_matrix(&self, d: usize) -> Result<MomentMatrix> {
        if d == 0 {
            return Err(PfrmtError::Dimension("moment matrix needs d >= 1".into()));
        }
        self.moment_matrix(d)
    }

    fn require_single(&self) -> Result<()> {
        if self.beta() == 4 {
            return Err(PfrmtError::UnsupportedReduction(format!(
                "{} has no one-point density; single moments only occur for beta=1",
                self.id
            )));
        }
        Ok(())
    }

    pub(crate) fn check_off_support(&self, kappa: Complex64) -> Result<()> {
        if !(kappa.re.is_finite() && kappa.im.is_finite()) {
            return Err(PfrmtError::Numeric(format!("shift {kappa} is not finite")));
        }
        let on = kappa.im == 0.0 && (self.id.is_gauss() || kappa.re >= 0.0);
        if on {
            return Err(PfrmtError::OnSupport(format!("{kappa} lies on the support of {}", self.id)));
        }
        Ok(())
    }

    /// Grid for integrands with poles at the given shifts, in the integration variable.
    fn sample(&self, kappas: &[Complex64]) -> Sampled {
        let nu = self.nu as i32;
        let (lo, hi, poles): (f64, f64, Vec<Complex64>) = if self.id.is_gauss() {
            (-GAUSS_CUTOFF, GAUSS_CUTOFF, kappas.to_vec())
        } else {
            let poles = kappas.iter().flat_map(|k| [k.sqrt(), -k.sqrt()]).collect();
            (0.0, LAGUERRE_CUTOFF, poles)
        };
        let grid = PanelGrid::new(lo, hi, self.spec.base_width, self.spec.points_per_panel, &poles);
        let (x, rho): (Vec<f64>, Vec<f64>) = grid
            .nodes
            .iter()
            .map(|&t| match self.id {
                EnsembleId::GaussBeta1 | EnsembleId::GaussBeta4 => (t, (-0.5 * t * t).exp()),
                // x = u², P(x) dx = 2 u^ν e^{-u²} du
                EnsembleId::LaguerreBeta1 => (t * t, 2.0 * t.powi(nu) * (-t * t).exp()),
                // x = u², x^{ν+1} e^{-x} dx = 2 u^{2ν+3} e^{-u²} du
                EnsembleId::LaguerreBeta4 => (t * t, 2.0 * t.powi(2 * nu + 3) * (-t * t).exp()),
            })
            .unzip();
        Sampled { grid, x, rho }
    }

    fn check_fn(&self, f: &TestFn) -> Result<()> {
        match f.pole() {
            Some(k) => self.check_off_support(k),
            None => Ok(()),
        }
    }

    fn grid_for(&self, fs: &[&TestFn]) -> Arc<Sampled> {
        let poles: Vec<Complex64> = fs.iter().filter_map(|f| f.pole()).collect();
        if poles.is_empty() {
            self.base.clone()
        } else {
            Arc::new(self.sample(&poles))
        }
    }
}

fn empty() -> Sampled {
    Sampled { grid: PanelGrid::new(0.0, 0.0, 1.0, 4, &[]), x: vec![], rho: vec![] }
}

fn finite(v: Complex64, what: &str) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(PfrmtError::DivergentMoment(format!("{what} is not finite")))
    }
}

impl PairMeasure for Ensemble {
    fn pair(&self, f1: &TestFn, f2: &TestFn) -> Result<Complex64> {
        Ok(self.pair_row(f1, std::slice::from_ref(f2))?[0])
    }

    fn single(&self, f: &TestFn) -> Result<Complex64> {
        self.require_single()?;
        self.check_fn(f)?;
        if let TestFn::Monomial(p) = *f {
            return Ok(Complex64::new(self.raw_moment(p), 0.0));
        }
        let s = self.grid_for(&[f]);
        finite(s.integrate(|x| f.value(x)), "single integral")
    }

    fn has_single(&self) -> bool {
        self.beta() == 1
    }

    fn pair_row(&self, f1: &TestFn, f2s: &[TestFn]) -> Result<Vec<Complex64>> {
        self.check_fn(f1)?;
        for g in f2s {
            self.check_fn(g)?;
        }
        if self.beta() == 4 {
            return f2s
                .iter()
                .map(|g| match (*f1, *g) {
                    (TestFn::Monomial(p), TestFn::Monomial(q)) => {
                        // ⟨x^p, x^q⟩ = (p - q) ∫P x^{p+q-1}
                        let c = p as f64 - q as f64;
                        let m = if c == 0.0 { 0.0 } else { self.raw_moment(p + q - 1) };
                        Ok(Complex64::new(c * m, 0.0))
                    }
                    _ => {
                        let s = self.grid_for(&[f1, g]);
                        finite(
                            s.integrate(|x| f1.derivative(x) * g.value(x) - f1.value(x) * g.derivative(x)),
                            "confluent pair integral",
                        )
                    }
                })
                .collect();
        }
        // β=1: ⟨f₁, g⟩ = J[f₁, g] - J[g, f₁], J[A, B] = ∫ ρB(y) ∫_{x<y} ρA(x).
        let mut groups: Vec<(Option<Complex64>, Vec<usize>)> = Vec::new();
        for (i, g) in f2s.iter().enumerate() {
            let key = g.pole();
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(i),
                None => groups.push((key, vec![i])),
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); f2s.len()];
        for (_, idx) in groups {
            let s = self.grid_for(&[f1, &f2s[idx[0]]]);
            let a = s.weighted(|x| f1.value(x));
            let cum_a = s.grid.cumulative(&a);
            for i in idx {
                let g = &f2s[i];
                let b = s.weighted(|x| g.value(x));
                let cum_b = s.grid.cumulative(&b);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..b.len() {
                    acc += s.grid.weights[k] * (b[k] * cum_a[k] - a[k] * cum_b[k]);
                }
                out[i] = finite(acc, "ordered pair integral")?;
            }
        }
        Ok(out)
    }
}

/// Finite atomic measure: `g = Σ c_k δ(x - p_k) δ(y - q_k)` and
/// `h = Σ e_l δ(x - r_l)`, with complex atoms. Every reduced integral is a
/// finite sum, so master integrals can be brute-forced exactly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointMeasure {
    /// `(p_k, q_k, c_k)`.
    pub pairs: Vec<(Complex64, Complex64, Complex64)>,
    /// `(r_l, e_l)`; empty for a measure without one-point density.
    pub singles: Vec<(Complex64, Complex64)>,
}

impl PointMeasure {
    /// Brute-force `Z_(k₁/k₂)` with `n_pairs` pairs, adding the `h` variable
    /// when `odd` is set; `Δ(z) = Π_{a<b}(z_a - z_b)` over `(p, q, p, q, …, r)`.
    pub fn brute_z(&self, n_pairs: usize, kappa1: &[Complex64], kappa2: &[Complex64], odd: bool) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let hs: Vec<(Option<Complex64>, Complex64)> = if odd {
            self.singles.iter().map(|&(r, e)| (Some(r), e)).collect()
        } else {
            vec![(None, one)]
        };
        let np = self.pairs.len();
        let mut total = Complex64::new(0.0, 0.0);
        let mut choice = vec![0usize; n_pairs];
        loop {
            for &(r, e) in &hs {
                let mut z = Vec::with_capacity(2 * n_pairs + 1);
                let mut w = e;
                for &k in &choice {
                    let (p, q, c) = self.pairs[k];
                    z.push(p);
                    z.push(q);
                    w *= c;
                }
                if let Some(r) = r {
                    z.push(r);
                }
                for a in 0..z.len() {
                    for b in a + 1..z.len() {
                        w *= z[a] - z[b];
                    }
                    for &k in kappa2 {
                        w *= z[a] - k;
                    }
                    for &k in kappa1 {
                        w /= k - z[a];
                    }
                }
                total += w;
            }
            // Odometer over pair choices.
            let mut i = 0;
            while i < n_pairs {
                choice[i] += 1;
                if choice[i] < np {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == n_pairs {
                break;
            }
        }
        total
    }
}

impl PairMeasure for PointMeasure {
    fn pair(&self, f1: &TestFn, f2: &TestFn) -> Result<Complex64> {
        Ok(self.pairs.iter().map(|&(p, q, c)| c * (f1.eval(p) * f2.eval(q) - f2.eval(p) * f1.eval(q))).sum())
    }

    fn single(&self, f: &TestFn) -> Result<Complex64> {
        if self.singles.is_empty() {
            return Err(PfrmtError::UnsupportedReduction("point measure has no one-point atoms".into()));
        }
        Ok(self.singles.iter().map(|&(r, e)| e * f.eval(r)).sum())
    }

    fn has_single(&self) -> bool {
        !self.singles.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const SQRT_2PI: f64 = 2.5066282746310002;

    #[test]
    fn single_moments_of_gaussian() {
        let e = Ensemble::gauss_beta1();
        assert!((e.moment_single(1).unwrap() - SQRT_2PI).abs() < 1e-15);
        assert_eq!(e.moment_single(2).unwrap(), 0.0);
        assert!((e.moment_single(3).unwrap() - SQRT_2PI).abs() < 1e-15);
        assert!((e.raw_moment_quadrature(0) - SQRT_2PI).abs() < 1e-14);
        let e4 = Ensemble::gauss_beta4();
        assert!(matches!(e4.moment_single(1), Err(PfrmtError::UnsupportedReduction(_))));
    }

    #[test]
    fn pair_moment_examples() {
        let e1 = Ensemble::gauss_beta1();
        assert!((e1.moment_pair(1, 2).unwrap() - 2.0 * PI.sqrt()).abs() < 1e-13);
        assert_eq!(e1.moment_pair(3, 3).unwrap(), 0.0);
        let e4 = Ensemble::gauss_beta4();
        assert!((e4.moment_pair(1, 2).unwrap() + SQRT_2PI).abs() < 1e-15);
    }

    #[test]
    fn beta4_moment_matrix_d3() {
        let m = Ensemble::gauss_beta4().build_moment_matrix(3).unwrap();
        assert!(!m.bordered);
        assert_eq!(m.matrix.dim(), 3);
        assert!((m.matrix.get(0, 1).re + SQRT_2PI).abs() < 1e-15);
        assert_eq!(m.matrix.get(0, 2).re, 0.0);
        assert!((m.matrix.get(1, 2).re + SQRT_2PI).abs() < 1e-15);
    }

    #[test]
    fn beta1_bordered_layout() {
        let m = Ensemble::gauss_beta1().build_moment_matrix(1).unwrap();
        assert!(m.bordered);
        assert!((m.matrix.get(0, 1).re + SQRT_2PI).abs() < 1e-15);
        let m2 = Ensemble::gauss_beta1().build_moment_matrix(2).unwrap();
        assert!((m2.matrix.get(0, 1).re - 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn cauchy_single_symmetry_and_sign() {
        let e = Ensemble::gauss_beta1();
        let a = e.cauchy_single(c(1.0, 2.0)).unwrap();
        let b = e.cauchy_single(c(1.0, -2.0)).unwrap();
        assert!((a - b.conj()).norm() < 1e-15);
        let v = e.cauchy_single(c(0.0, 1.0)).unwrap();
        assert!(v.re.abs() < 1e-15 && v.im < 0.0);
        let t = 100.0;
        let far = e.cauchy_single(c(0.0, t)).unwrap();
        let lead = SQRT_2PI / c(0.0, t);
        assert!((far - lead).norm() / lead.norm() < 1e-3);
        assert!(matches!(e.cauchy_single(c(0.5, 0.0)), Err(PfrmtError::OnSupport(_))));
    }

    #[test]
    fn f_kernel_is_antisymmetric() {
        for e in [Ensemble::gauss_beta1(), Ensemble::gauss_beta4(), Ensemble::laguerre_beta1(1)] {
            let (a, b) = (c(0.0, 1.0), c(1.0, 1.0));
            assert_eq!(e.f_kernel(a, a).unwrap(), c(0.0, 0.0));
            let fab = e.f_kernel(a, b).unwrap();
            let fba = e.f_kernel(b, a).unwrap();
            assert!((fab + fba).norm() < 1e-14 * fab.norm());
        }
    }

    #[test]
    fn laguerre_moments_match_gamma() {
        for nu in [0, 1, 2, 3] {
            let e = Ensemble::laguerre_beta1(nu);
            for s in 0..12 {
                let q = e.raw_moment_quadrature(s);
                let exact = gamma(s as f64 + 0.5 * (nu as f64 + 1.0));
                assert!((q / exact - 1.0).abs() < 1e-12, "nu={nu} s={s}: {q} vs {exact}");
            }
            let e4 = Ensemble::laguerre_beta4(nu);
            for s in 0..10 {
                let q = e4.raw_moment_quadrature(s);
                assert!((q / e4.raw_moment(s) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ids_round_trip() {
        for id in EnsembleId::ALL {
            assert_eq!(id.as_str().parse::<EnsembleId>().unwrap(), id);
            let j = serde_json::to_string(&id).unwrap();
            assert_eq!(j, format!("\"{}\"", id.as_str()));
        }
        assert!("gue".parse::<EnsembleId>().is_err());
    }
}
