//! `bench`: wall time of the Pfaffian path against the quadrature oracle.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::compute::{ensemble_of, params_of, pfaffian_path};
use super::config::RunConfig;
use crate::error::{PfrmtError, Result};
use crate::kernels::EvalOptions;
use crate::oracle::{z_eigenvalue_quadrature, z_eigenvalue_quadrature_value, QuadratureSpec};
use crate::scalar::rel_dev;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// `Ndim` for β=1, quaternion dimension for β=4.
    pub n: usize,
    /// Size of the moment block, `k₂ - k₁ + n` (β=1) or `+ 2n` (β=4).
    pub d: i64,
    /// Mean over repeated runs.
    pub pfaffian_ms: f64,
    pub pfaffian_reps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
    /// Relative deviation between the two raw values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_dev: Option<f64>,
    /// Fine-minus-coarse estimate of the oracle's own error, relative.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_error: Option<f64>,
    /// The oracle exceeded its node budget.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub ensemble: String,
    pub k1: usize,
    pub k2: usize,
    pub quadrature_nodes: usize,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `log pfaffian_ms` against `log d` over rows with `d ≥ 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pfaffian_exponent: Option<f64>,
}

/// Sweep sizes: `{1,2,3,4}` for β=1, `{1,2,3}` for β=4.
pub fn default_sweep(beta: u8) -> Vec<usize> {
    if beta == 1 {
        vec![1, 2, 3, 4]
    } else {
        vec![1, 2, 3]
    }
}

/// Repeats `f` until at least `min_ms` has elapsed (and at least 3 times); mean time.
fn time_repeated(min_ms: f64, mut f: impl FnMut() -> Result<()>) -> Result<(f64, usize)> {
    let t0 = Instant::now();
    let mut reps = 0;
    while reps < 3 || t0.elapsed().as_secs_f64() * 1e3 < min_ms {
        f()?;
        reps += 1;
    }
    Ok((t0.elapsed().as_secs_f64() * 1e3 / reps as f64, reps))
}

fn fit_exponent(rows: &[BenchRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.d >= 1).map(|r| ((r.d as f64).ln(), r.pfaffian_ms.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// One timing row. The Pfaffian timing includes building the ensemble, so the
/// moment integrals are part of the measured cost.
pub fn bench_row(c: &RunConfig, n: usize) -> Result<BenchRow> {
    let cfg = RunConfig { n, ..c.clone() };
    cfg.validate()?;
    let p = params_of(&cfg)?;
    let opts = EvalOptions::with_precision(cfg.precision);
    let mut value = None;
    let (pfaffian_ms, pfaffian_reps) = time_repeated(50.0, || {
        let e = ensemble_of(&cfg)?;
        value = Some(pfaffian_path(&e, n, &p, &opts)?);
        Ok(())
    })?;
    let z = value.expect("at least one repetition");
    let e = ensemble_of(&cfg)?;
    let q = QuadratureSpec { nodes_per_dim: cfg.quadrature_nodes, ..Default::default() };
    let mut row = BenchRow {
        n,
        d: z.d,
        pfaffian_ms,
        pfaffian_reps,
        oracle_ms: None,
        speedup: None,
        rel_dev: None,
        oracle_error: None,
        capped: false,
    };
    let t0 = Instant::now();
    match z_eigenvalue_quadrature_value(&e, n, &p, &q) {
        Ok((o, _)) => {
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            row.oracle_ms = Some(ms);
            row.speedup = Some(ms / pfaffian_ms);
            row.rel_dev = Some(rel_dev(z.value, o));
        }
        Err(PfrmtError::Budget { .. }) => {
            row.capped = true;
            return Ok(row);
        }
        Err(e) => return Err(e),
    }
    let est = z_eigenvalue_quadrature(&e, n, &p, &q)?;
    row.oracle_error = Some(est.error / est.value.norm());
    Ok(row)
}

pub fn cmd_bench(c: &RunConfig, sweep: &[usize]) -> Result<BenchReport> {
    let p = params_of(c)?;
    let rows = sweep.iter().map(|&n| bench_row(c, n)).collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        ensemble: c.ensemble.to_string(),
        k1: p.k1(),
        k2: p.k2(),
        quadrature_nodes: c.quadrature_nodes,
        pfaffian_exponent: fit_exponent(&rows),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn small_sweep_agrees() {
        let c = RunConfig {
            n: 1,
            kappa1: vec![Complex64::new(0.2, 0.9)],
            kappa2: vec![Complex64::new(-0.4, 0.3)],
            quadrature_nodes: 64,
            ..Default::default()
        };
        let r = cmd_bench(&c, &[1, 2]).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert!(!row.capped);
            assert!(row.rel_dev.unwrap() < 1e-8, "{row:?}");
        }
    }

    #[test]
    fn budget_overflow_is_a_capped_row() {
        let c = RunConfig { n: 1, quadrature_nodes: 20_000, ..Default::default() };
        let row = bench_row(&c, 2).unwrap();
        assert!(row.capped && row.oracle_ms.is_none());
    }

    #[test]
    fn exponent_of_power_law() {
        let rows: Vec<BenchRow> = (1..=4)
            .map(|d| BenchRow {
                n: d,
                d: d as i64,
                pfaffian_ms: (d as f64).powi(3),
                pfaffian_reps: 1,
                oracle_ms: None,
                speedup: None,
                rel_dev: None,
                oracle_error: None,
                capped: false,
            })
            .collect();
        assert!((fit_exponent(&rows).unwrap() - 3.0).abs() < 1e-12);
    }
}
