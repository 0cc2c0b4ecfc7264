//! Gaussian quadrature rules and the composite panel grid used by the
//! ensemble reductions.

use std::f64::consts::PI;

use num_complex::Complex64;
use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::gamma;

/// Nodes and weights of an interpolatory rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine map of a rule on `[-1, 1]` to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> GaussRule {
        let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
        GaussRule {
            nodes: self.nodes.iter().map(|&x| c + h * x).collect(),
            weights: self.weights.iter().map(|&w| h * w).collect(),
        }
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// Gauss rule from the three-term recurrence of the orthonormal polynomials,
/// `b_{k+1} p_{k+1} = (x - a_k) p_k - b_k p_{k-1}`, with `b` holding
/// `b_1..=b_n` and `mu0` the total mass. Golub–Welsch eigenvalues seed a
/// Newton polish on `p_n`; weights are the Christoffel numbers `1/Σ p_k²`.
fn rule_from_recurrence(a: &[f64], b: &[f64], mu0: f64) -> GaussRule {
    let n = a.len();
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            a[i]
        } else if i + 1 == j {
            b[i]
        } else if j + 1 == i {
            b[j]
        } else {
            0.0
        }
    });
    let mut seeds: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    seeds.sort_by(f64::total_cmp);
    let p0 = 1.0 / mu0.sqrt();
    // Returns (p_n, p_n', Σ_{k<n} p_k²).
    let eval = |x: f64| -> (f64, f64, f64) {
        let (mut pm, mut p) = (0.0, p0);
        let (mut dpm, mut dp) = (0.0, 0.0);
        let mut sum = p0 * p0;
        for k in 0..n {
            let bprev = if k == 0 { 0.0 } else { b[k - 1] };
            let pn = ((x - a[k]) * p - bprev * pm) / b[k];
            let dpn = (p + (x - a[k]) * dp - bprev * dpm) / b[k];
            pm = p;
            p = pn;
            dpm = dp;
            dp = dpn;
            if k + 1 < n {
                sum += p * p;
            }
        }
        (p, dp, sum)
    };
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in &seeds {
        let mut x = x0;
        for _ in 0..8 {
            let (p, dp, _) = eval(x);
            let dx = p / dp;
            if !dx.is_finite() {
                break;
            }
            x -= dx;
            if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
                break;
            }
        }
        nodes.push(x);
        weights.push(1.0 / eval(x).2);
    }
    GaussRule { nodes, weights }
}

/// Gauss–Hermite rule for the weight `exp(-x²/2)` on the real line.
pub fn gauss_hermite(n: usize) -> GaussRule {
    let b: Vec<f64> = (1..=n).map(|k| (k as f64).sqrt()).collect();
    let mut r = rule_from_recurrence(&vec![0.0; n], &b, (2.0 * PI).sqrt());
    // Symmetrize away eigensolver roundoff.
    for i in 0..n / 2 {
        let x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
        let w = 0.5 * (r.weights[n - 1 - i] + r.weights[i]);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        r.nodes[n / 2] = 0.0;
    }
    r
}

/// Generalized Gauss–Laguerre rule for the weight `x^alpha exp(-x)` on `[0, ∞)`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> GaussRule {
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let b: Vec<f64> = (1..=n).map(|k| (k as f64 * (k as f64 + alpha)).sqrt()).collect();
    rule_from_recurrence(&diag, &b, gamma(alpha + 1.0))
}

/// Composite Gauss–Legendre grid on `[lo, hi]` with panels shrunk near
/// nominated complex points (poles of the integrand), plus the spectral
/// integration matrix that yields running integrals at every node.
#[derive(Debug, Clone)]
pub struct PanelGrid {
    /// Panel boundaries, ascending, `len = panels + 1`.
    pub edges: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    points: usize,
    /// `cum[i][j] = ∫_{-1}^{x_i} ℓ_j(s) ds` on the reference panel.
    cum: std::sync::Arc<Vec<f64>>,
}

/// Reference rule and running-integral matrix for `m` points per panel.
fn reference_panel(m: usize) -> (GaussRule, Vec<f64>) {
    let rule = gauss_legendre(m);
    let mut cum = vec![0.0; m * m];
    let pk = |x: f64| -> Vec<f64> {
        let mut v = vec![1.0, x];
        for k in 2..=m {
            let p = ((2 * k - 1) as f64 * x * v[k - 1] - (k - 1) as f64 * v[k - 2]) / k as f64;
            v.push(p);
        }
        v
    };
    let pj: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| pk(x)).collect();
    for i in 0..m {
        let pi = &pj[i];
        for j in 0..m {
            let mut s = 0.5 * (rule.nodes[i] + 1.0);
            for k in 1..m {
                s += 0.5 * pj[j][k] * (pi[k + 1] - pi[k - 1]);
            }
            cum[i * m + j] = rule.weights[j] * s;
        }
    }
    (rule, cum)
}

impl PanelGrid {
    /// `base` is the largest panel width; near each point `c` of `poles` the
    /// width is capped at `max(|Im c|, |x - Re c|) / 2`.
    pub fn new(lo: f64, hi: f64, base: f64, points: usize, poles: &[Complex64]) -> PanelGrid {
        let local = |x: f64| -> f64 {
            poles
                .iter()
                .map(|c| 0.5 * c.im.abs().max((x - c.re).abs()))
                .fold(base, f64::min)
                .max(1e-6)
        };
        let mut edges = vec![lo];
        let mut x = lo;
        while x < hi {
            let mut h = local(x);
            // Do not step over a pole's real part with a wide panel.
            for c in poles {
                if c.re > x && c.re < x + h {
                    h = h.min((c.re - x).max(local(c.re)));
                }
            }
            if x + h > hi - 1e-3 * h {
                h = hi - x;
            }
            x += h;
            edges.push(x.min(hi));
        }
        let (rule, cum) = reference_panel(points);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * points);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in edges.windows(2) {
            let r = rule.mapped(p[0], p[1]);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        PanelGrid { edges, nodes, weights, points, cum: std::sync::Arc::new(cum) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn points_per_panel(&self) -> usize {
        self.points
    }

    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Running integral `∫_{lo}^{x_i} f` at every node, from samples of `f`.
    pub fn cumulative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let m = self.points;
        let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
        let mut base = Complex64::new(0.0, 0.0);
        for (p, edge) in self.edges.windows(2).enumerate() {
            let h = 0.5 * (edge[1] - edge[0]);
            let f = &values[p * m..(p + 1) * m];
            for i in 0..m {
                let row = &self.cum[i * m..(i + 1) * m];
                let s: Complex64 = row.iter().zip(f).map(|(c, v)| v * *c).sum();
                out[p * m + i] = base + s * h;
            }
            let total: Complex64 = f
                .iter()
                .zip(&self.weights[p * m..(p + 1) * m])
                .map(|(v, w)| v * w)
                .sum();
            base += total;
        }
        out
    }
}
