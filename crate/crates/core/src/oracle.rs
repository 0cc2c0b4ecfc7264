//! Brute-force reference values: eigenvalue-measure quadrature, matrix
//! Monte Carlo and the ε-regularized confluent pair limit for β=4.
//!
//! None of these paths touch the moment matrix or any Pfaffian formula.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{Ensemble, EnsembleId, TestFn};
use crate::error::{PfrmtError, Result};
use crate::quadrature::{gauss_hermite, gauss_laguerre, gauss_legendre, PanelGrid};
use crate::scalar::factorial;
use crate::skew_linalg::{det, DenseMatrix, SpectralParams};

/// Hard cap on `nodes_per_dim^Ndim`.
pub const NODE_CAP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadScheme {
    /// Composite Gauss–Legendre panels on the truncated support, refined
    /// toward the poles.
    CompositeLegendre,
    /// Tensor Gauss–Hermite (gauss weights only).
    GaussHermite,
    /// Tensor generalized Gauss–Laguerre (laguerre weights only).
    GaussLaguerre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes along one axis before pole refinement.
    pub nodes_per_dim: usize,
    pub scheme: QuadScheme,
    /// Integrate over `E₁ ≤ … ≤ E_N` by nested rules (true) or over the full
    /// space divided by `N!` (false).
    pub ordered: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes_per_dim: 128, scheme: QuadScheme::CompositeLegendre, ordered: true }
    }
}

/// A reference value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: Complex64,
    /// `|value - coarse|`, the coarse run using half the nodes per axis.
    pub error: f64,
    /// Integrand evaluations of the fine run.
    pub evaluations: u64,
}

const PANEL_POINTS: usize = 16;
const GAUSS_HALF_WIDTH: f64 = 11.0;
/// Upper limit in `u = √x` for laguerre weights.
const LAGUERRE_U_MAX: f64 = 8.0;

/// Sum with a fixed binary tree, independent of how the input was produced.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// One integration axis in `u`, with `E = u` (gauss) or `E = u²` (laguerre).
struct Axis {
    squared: bool,
    edges: Vec<f64>,
    reference: (Vec<f64>, Vec<f64>),
    /// Per panel: `(E, w·P(E)·dE/du)` at the panel nodes.
    panels: Vec<Vec<(f64, f64)>>,
    weight: Box<dyn Fn(f64) -> f64 + Sync>,
}

impl Axis {
    fn new(e: &Ensemble, nodes: usize, poles: &[Complex64]) -> Axis {
        let squared = !e.id().is_gauss();
        let (lo, hi) = if squared { (0.0, LAGUERRE_U_MAX) } else { (-GAUSS_HALF_WIDTH, GAUSS_HALF_WIDTH) };
        let panels = nodes.div_ceil(PANEL_POINTS).max(1);
        let upoles: Vec<Complex64> =
            if squared { poles.iter().flat_map(|k| [k.sqrt(), -k.sqrt()]).collect() } else { poles.to_vec() };
        let grid = PanelGrid::new(lo, hi, (hi - lo) / panels as f64, PANEL_POINTS, &upoles);
        let r = gauss_legendre(PANEL_POINTS);
        let e2 = e.clone();
        let weight: Box<dyn Fn(f64) -> f64 + Sync> = if squared {
            Box::new(move |u: f64| e2.weight(u * u) * 2.0 * u)
        } else {
            Box::new(move |u: f64| e2.weight(u))
        };
        let mut axis = Axis { squared, edges: grid.edges.clone(), reference: (r.nodes, r.weights), panels: vec![], weight };
        axis.panels = axis.edges.windows(2).map(|w| axis.panel_nodes(w[0], w[1])).collect();
        axis
    }

    fn panel_nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
        self.reference
            .0
            .iter()
            .zip(&self.reference.1)
            .map(|(&t, &w)| {
                let u = c + h * t;
                let x = if self.squared { u * u } else { u };
                (x, h * w * (self.weight)(u))
            })
            .collect()
    }

    fn len(&self) -> usize {
        self.panels.iter().map(Vec::len).sum()
    }

    /// Nodes of the rule restricted to `u ≤ t`, in the `E` variable.
    fn below(&self, t: Option<f64>) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for (k, w) in self.edges.windows(2).enumerate() {
            match t {
                Some(t) if w[1] > t => {
                    if w[0] < t {
                        out.extend(self.panel_nodes(w[0], t));
                    }
                    break;
                }
                _ => out.extend_from_slice(&self.panels[k]),
            }
        }
        out
    }

    fn to_u(&self, x: f64) -> f64 {
        if self.squared {
            x.sqrt()
        } else {
            x
        }
    }
}

/// `∫_{E₁≤…≤E_n} Π_a P(E_a) g(E_a) Π_{a<b} |E_b - E_a|^β dE`.
fn ordered_product_integral(
    axis: &Axis,
    n: usize,
    beta: i32,
    g: &(dyn Fn(f64) -> Complex64 + Sync),
) -> (Complex64, u64) {
    fn rec(
        axis: &Axis,
        level: usize,
        upper: &mut Vec<f64>,
        beta: i32,
        g: &(dyn Fn(f64) -> Complex64 + Sync),
        count: &mut u64,
    ) -> Complex64 {
        let t = upper.last().map(|&x| axis.to_u(x));
        let nodes = axis.below(t);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in nodes {
            let mut f = g(x) * w;
            for &y in upper.iter() {
                f *= (y - x).powi(beta);
            }
            if level > 1 {
                upper.push(x);
                f *= rec(axis, level - 1, upper, beta, g, count);
                upper.pop();
            } else {
                *count += 1;
            }
            acc += f;
        }
        acc
    }
    if n == 0 {
        return (Complex64::new(1.0, 0.0), 1);
    }
    let outer = axis.below(None);
    let parts: Vec<(Complex64, u64)> = outer
        .par_iter()
        .map(|&(x, w)| {
            let mut count = 0u64;
            let f = g(x) * w;
            let inner = if n > 1 {
                let mut upper = vec![x];
                rec(axis, n - 1, &mut upper, beta, g, &mut count)
            } else {
                count = 1;
                Complex64::new(1.0, 0.0)
            };
            (f * inner, count)
        })
        .collect();
    let vals: Vec<Complex64> = parts.iter().map(|p| p.0).collect();
    (pairwise_sum(&vals), parts.iter().map(|p| p.1).sum())
}

/// Full-space tensor rule of the given per-axis nodes, divided by `n!`.
fn tensor_product_integral(
    nodes: &[(f64, f64)],
    n: usize,
    beta: i32,
    g: &(dyn Fn(f64) -> Complex64 + Sync),
) -> (Complex64, u64) {
    let m = nodes.len();
    let total = m.pow(n as u32);
    let chunk = m.pow(n.saturating_sub(1) as u32).max(1);
    let parts: Vec<Complex64> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut xs = vec![0.0; n];
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                let mut r = idx;
                let mut f = Complex64::new(1.0, 0.0);
                for a in 0..n {
                    let (x, w) = nodes[r % m];
                    r /= m;
                    xs[a] = x;
                    f *= g(x) * w;
                    for &y in &xs[..a] {
                        f *= (y - x).abs().powi(beta);
                    }
                }
                acc += f;
            }
            acc
        })
        .collect();
    (pairwise_sum(&parts) / factorial(n), total as u64)
}

fn ratio_factor(p: &SpectralParams, gamma: i32) -> impl Fn(f64) -> Complex64 + Sync + '_ {
    move |x: f64| {
        let mut r = Complex64::new(1.0, 0.0);
        for &k in &p.kappa2 {
            r *= x - k;
        }
        for &k in &p.kappa1 {
            r /= x - k;
        }
        r.powi(gamma)
    }
}

fn check_budget(nodes: usize, ndim: usize) -> Result<()> {
    let requested = (nodes as f64).powi(ndim as i32);
    if requested > NODE_CAP {
        return Err(PfrmtError::Budget { nodes: requested, cap: NODE_CAP });
    }
    Ok(())
}

fn check_quadrature_inputs(e: &Ensemble, ndim: usize, p: &SpectralParams, q: &QuadratureSpec) -> Result<()> {
    p.validate()?;
    for &k in &p.kappa1 {
        e.check_off_support(k)?;
    }
    if ndim == 0 {
        return Err(PfrmtError::Dimension("matrix dimension must be positive".into()));
    }
    if q.nodes_per_dim < 2 {
        return Err(PfrmtError::Config { field: "quadrature_nodes".into(), message: "need at least 2 nodes".into() });
    }
    check_budget(q.nodes_per_dim, ndim)
}

fn quadrature_pass(e: &Ensemble, ndim: usize, p: &SpectralParams, q: &QuadratureSpec, nodes: usize) -> Result<(Complex64, u64)> {
    let (beta, gamma) = if e.beta() == 1 { (1, 1) } else { (4, 2) };
    let g = ratio_factor(p, gamma);
    let (v, n) = match q.scheme {
        QuadScheme::CompositeLegendre => {
            let axis = Axis::new(e, nodes, &p.kappa1);
            if q.ordered {
                ordered_product_integral(&axis, ndim, beta, &g)
            } else {
                tensor_product_integral(&axis.below(None), ndim, beta, &g)
            }
        }
        QuadScheme::GaussHermite => {
            if !e.id().is_gauss() {
                return Err(PfrmtError::UnsupportedOracle("Gauss–Hermite needs a gauss weight".into()));
            }
            let r = gauss_hermite(nodes);
            let pts: Vec<(f64, f64)> = r.nodes.into_iter().zip(r.weights).collect();
            tensor_product_integral(&pts, ndim, beta, &g)
        }
        QuadScheme::GaussLaguerre => {
            let alpha = match e.id() {
                EnsembleId::LaguerreBeta1 => 0.5 * (e.nu() as f64 - 1.0),
                EnsembleId::LaguerreBeta4 => e.nu() as f64 + 1.0,
                _ => return Err(PfrmtError::UnsupportedOracle("Gauss–Laguerre needs a laguerre weight".into())),
            };
            let r = gauss_laguerre(nodes, alpha);
            let pts: Vec<(f64, f64)> = r.nodes.into_iter().zip(r.weights).collect();
            tensor_product_integral(&pts, ndim, beta, &g)
        }
    };
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(PfrmtError::Numeric("oracle quadrature produced a non-finite value".into()));
    }
    Ok((v, n))
}

/// `∫ Π P(E_a) |Δ(E)|^β Π_a [Π_j (E_a - κ_{j2}) / (E_a - κ_{j1})]^γ` over
/// `E₁ ≤ … ≤ E_Ndim`, with `γ = 1` (β=1) or `2` (β=4). For β=4 `ndim` counts
/// distinct (doubly degenerate) eigenvalues.
pub fn z_eigenvalue_quadrature(e: &Ensemble, ndim: usize, p: &SpectralParams, q: &QuadratureSpec) -> Result<OracleValue> {
    check_quadrature_inputs(e, ndim, p, q)?;
    let (fine, evaluations) = quadrature_pass(e, ndim, p, q, q.nodes_per_dim)?;
    let (coarse, _) = quadrature_pass(e, ndim, p, q, (q.nodes_per_dim / 2).max(1))?;
    Ok(OracleValue { value: fine, error: (fine - coarse).norm(), evaluations })
}

/// The fine pass of [`z_eigenvalue_quadrature`] alone, without the error
/// estimate; used for timing.
pub fn z_eigenvalue_quadrature_value(e: &Ensemble, ndim: usize, p: &SpectralParams, q: &QuadratureSpec) -> Result<(Complex64, u64)> {
    check_quadrature_inputs(e, ndim, p, q)?;
    quadrature_pass(e, ndim, p, q, q.nodes_per_dim)
}

/// `∬_{E₁≤E₂} P(E₁)P(E₂) [f₁(E₁)f₂(E₂) - f₂(E₁)f₁(E₂)]` by nested quadrature,
/// the unreduced form of the β=1 pair integral.
pub fn ordered_pair_quadrature(e: &Ensemble, f1: &TestFn, f2: &TestFn, nodes_per_dim: usize) -> Result<Complex64> {
    let poles: Vec<Complex64> = [f1, f2]
        .iter()
        .filter_map(|f| match f {
            TestFn::Cauchy(k) => Some(*k),
            TestFn::Monomial(_) => None,
        })
        .collect();
    for &k in &poles {
        e.check_off_support(k)?;
    }
    let axis = Axis::new(e, nodes_per_dim, &poles);
    let outer = axis.below(None);
    let parts: Vec<Complex64> = outer
        .par_iter()
        .map(|&(y, wy)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, wx) in axis.below(Some(axis.to_u(y))) {
                acc += wx * (f1.value(x) * f2.value(y) - f2.value(x) * f1.value(y));
            }
            acc * wy
        })
        .collect();
    Ok(pairwise_sum(&parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCSpec {
    pub samples: u64,
    pub seed: u64,
}

/// Monte Carlo mean with per-component standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Complex64,
    /// `(σ_re, σ_im) / √samples`.
    pub std_err: Complex64,
    pub samples: u64,
}

impl McEstimate {
    /// True when `x` lies within `k` standard errors in both components.
    pub fn contains(&self, x: Complex64, k: f64) -> bool {
        let d = x - self.mean;
        d.re.abs() <= k * self.std_err.re && d.im.abs() <= k * self.std_err.im
    }
}

const MC_CHUNK: u64 = 4096;

fn sample_matrix(beta: u8, ndim: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<f64> {
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if beta == 1 {
        let mut h = DenseMatrix::zeros(ndim, ndim);
        for i in 0..ndim {
            h.set(i, i, Complex64::new(normal(), 0.0));
            for j in i + 1..ndim {
                let v = Complex64::new(s * normal(), 0.0);
                h.set(i, j, v);
                h.set(j, i, v);
            }
        }
        h
    } else {
        // [[A, B], [-B̄, Ā]] with A Hermitian, B antisymmetric.
        let n = ndim;
        let mut h = DenseMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let a = Complex64::new(normal(), 0.0);
            h.set(i, i, a);
            h.set(n + i, n + i, a);
            for j in i + 1..n {
                let a = Complex64::new(s * normal(), s * normal());
                let b = Complex64::new(s * normal(), s * normal());
                h.set(i, j, a);
                h.set(j, i, a.conj());
                h.set(n + i, n + j, a.conj());
                h.set(n + j, n + i, a);
                h.set(i, n + j, b);
                h.set(j, n + i, -b);
                h.set(n + i, j, -b.conj());
                h.set(n + j, i, b.conj());
            }
        }
        h
    }
}

fn shifted_det(h: &DenseMatrix<f64>, kappa: Complex64) -> Result<Complex64> {
    let mut m = h.clone();
    for i in 0..m.rows() {
        m.set(i, i, m.get(i, i) - kappa);
    }
    let d = det(&m)?;
    if kappa.im == 0.0 && d.im.abs() > 1e-10 * d.norm().max(1.0) {
        return Err(PfrmtError::Numeric(format!("determinant of a Hermitian matrix at real shift has imaginary part {}", d.im)));
    }
    Ok(d)
}

/// `E[Π_j det(H - κ_{j2}) / Π_j det(H - κ_{j1})]` over Gaussian matrices with
/// density `∝ exp(-tr H²/2)` (β=1, real symmetric `Ndim × Ndim`) or
/// `∝ exp(-tr H²/4)` (β=4, `2N × 2N` self-dual), matching the weight
/// `exp(-E²/2)` per (distinct) eigenvalue. Sample `i` uses stream `i` of a
/// ChaCha8 generator keyed by the seed, so the result does not depend on the
/// thread count.
pub fn z_matrix_montecarlo(e: &Ensemble, ndim: usize, p: &SpectralParams, mc: &MCSpec) -> Result<McEstimate> {
    if !e.id().is_gauss() {
        return Err(PfrmtError::UnsupportedOracle(format!("matrix sampling is implemented for gauss ensembles, not {}", e.id())));
    }
    p.validate()?;
    let gamma = if e.beta() == 1 { 1 } else { 2 };
    if ndim == 0 || ndim * gamma > 16 {
        return Err(PfrmtError::Dimension(format!("matrix Monte Carlo needs 1 ≤ Ndim·γ ≤ 16, got {}", ndim * gamma)));
    }
    if mc.samples < 2 {
        return Err(PfrmtError::Config { field: "samples".into(), message: "need at least 2 samples".into() });
    }
    let chunks = mc.samples.div_ceil(MC_CHUNK);
    let parts: Vec<Result<[Complex64; 2]>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * MC_CHUNK;
            let hi = ((c + 1) * MC_CHUNK).min(mc.samples);
            let mut vals = Vec::with_capacity((hi - lo) as usize);
            let mut sq = Vec::with_capacity((hi - lo) as usize);
            for i in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
                rng.set_stream(i);
                let h = sample_matrix(e.beta(), ndim, &mut rng);
                let mut r = Complex64::new(1.0, 0.0);
                for &k in &p.kappa2 {
                    r *= shifted_det(&h, k)?;
                }
                for &k in &p.kappa1 {
                    r /= shifted_det(&h, k)?;
                }
                vals.push(r);
                sq.push(Complex64::new(r.re * r.re, r.im * r.im));
            }
            Ok([pairwise_sum(&vals), pairwise_sum(&sq)])
        })
        .collect();
    let mut sums = Vec::with_capacity(parts.len());
    let mut sqs = Vec::with_capacity(parts.len());
    for part in parts {
        let [s, q] = part?;
        sums.push(s);
        sqs.push(q);
    }
    let n = mc.samples as f64;
    let mean = pairwise_sum(&sums) / n;
    let sq = pairwise_sum(&sqs) / n;
    let var = |m2: f64, m: f64| ((m2 - m * m).max(0.0) * n / (n - 1.0)).sqrt() / n.sqrt();
    let std_err = Complex64::new(var(sq.re, mean.re), var(sq.im, mean.im));
    Ok(McEstimate { mean, std_err, samples: mc.samples })
}

/// Integrands available to the confluent pair oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfluentIntegrand {
    /// `⟨x^{a-1}, x^{b-1}⟩`, 1-based indices.
    MomentPair { a: u32, b: u32 },
    /// `⟨1/(κ-x), x^{b-1}⟩`.
    CauchyPair { kappa: Complex64, b: u32 },
    /// `⟨1/(κa-x), 1/(κb-x)⟩`.
    FKernel { ka: Complex64, kb: Complex64 },
}

impl ConfluentIntegrand {
    fn functions(&self) -> (TestFn, TestFn) {
        match *self {
            ConfluentIntegrand::MomentPair { a, b } => (TestFn::Monomial(a - 1), TestFn::Monomial(b - 1)),
            ConfluentIntegrand::CauchyPair { kappa, b } => (TestFn::Cauchy(kappa), TestFn::Monomial(b - 1)),
            ConfluentIntegrand::FKernel { ka, kb } => (TestFn::Cauchy(ka), TestFn::Cauchy(kb)),
        }
    }
}

/// β=4 pair integral with the distributional pair weight replaced by a pair
/// at `(E, E+ε)`: `-(1/ε) ∫ P(E) [f₁(E) f₂(E+ε) - f₂(E) f₁(E+ε)] dE`.
/// Converges to the confluent value as `ε → 0` with an `O(ε)` error.
pub fn epsilon_confluent_pair(e: &Ensemble, integrand: &ConfluentIntegrand, eps: f64) -> Result<Complex64> {
    if e.beta() != 4 {
        return Err(PfrmtError::UnsupportedOracle("the confluent pair oracle applies to beta=4 weights".into()));
    }
    if !(eps > 0.0) {
        return Err(PfrmtError::Config { field: "eps".into(), message: "must be positive".into() });
    }
    let (f1, f2) = integrand.functions();
    let mut poles = Vec::new();
    for f in [&f1, &f2] {
        if let TestFn::Cauchy(k) = *f {
            e.check_off_support(k)?;
            poles.push(k);
            poles.push(k - eps);
        }
    }
    let axis = Axis::new(e, 512, &poles);
    let vals: Vec<Complex64> = axis
        .below(None)
        .into_iter()
        .map(|(x, w)| w * (f1.value(x) * f2.value(x + eps) - f2.value(x) * f1.value(x + eps)))
        .collect();
    Ok(-pairwise_sum(&vals) / eps)
}

/// Polynomial (Neville) extrapolation of `values(eps)` to `eps = 0`.
pub fn richardson(eps: &[f64], values: &[Complex64]) -> Complex64 {
    let mut t = values.to_vec();
    let n = t.len();
    for k in 1..n {
        for i in 0..n - k {
            t[i] = (eps[i + k] * t[i] - eps[i] * t[i + 1]) / (eps[i + k] - eps[i]);
        }
    }
    t[0]
}

/// Observed convergence order from three values at geometrically halving `eps`.
pub fn observed_order(values: &[Complex64; 3], limit: Complex64) -> f64 {
    ((values[0] - limit).norm() / (values[1] - limit).norm()).log2()
}

/// Default ε ladder for the confluent oracle.
pub const EPS_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Richardson-extrapolated confluent value over [`EPS_LADDER`].
pub fn confluent_extrapolated(e: &Ensemble, integrand: &ConfluentIntegrand) -> Result<Complex64> {
    let vals: Vec<Complex64> = EPS_LADDER.iter().map(|&h| epsilon_confluent_pair(e, integrand, h)).collect::<Result<_>>()?;
    Ok(richardson(&EPS_LADDER, &vals))
}
