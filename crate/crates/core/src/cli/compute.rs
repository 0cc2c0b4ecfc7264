//! `compute`: formula and oracle paths for one configuration.

use std::time::Instant;

use num_complex::Complex64;

use super::config::{Deviation, Method, MethodResult, RunConfig, RunResult, SCHEMA_VERSION};
use crate::ensembles::Ensemble;
use crate::error::Result;
use crate::kernels::{z_goe, z_gse, EvalOptions, ZResult};
use crate::oracle::{z_eigenvalue_quadrature, z_matrix_montecarlo, MCSpec, QuadratureSpec};
use crate::scalar::rel_dev;
use crate::skew_linalg::SpectralParams;

pub fn ensemble_of(c: &RunConfig) -> Result<Ensemble> {
    Ensemble::new(c.ensemble, c.nu.unwrap_or(0))
}

pub fn params_of(c: &RunConfig) -> Result<SpectralParams> {
    SpectralParams::new(c.kappa1.clone(), c.kappa2.clone())
}

/// Unnormalized matrix average by the Pfaffian formulas (β picked from the ensemble).
pub fn pfaffian_path(e: &Ensemble, n: usize, p: &SpectralParams, opts: &EvalOptions) -> Result<ZResult> {
    if e.beta() == 1 {
        z_goe(e, n, p, opts)
    } else {
        z_gse(e, n, p, opts)
    }
}

fn empty() -> SpectralParams {
    SpectralParams { kappa1: vec![], kappa2: vec![] }
}

fn pick(c: &RunConfig, raw: Complex64, normalized: Complex64) -> Complex64 {
    if c.normalize {
        normalized
    } else {
        raw
    }
}

fn run_pfaffian(c: &RunConfig, e: &Ensemble, p: &SpectralParams) -> Result<MethodResult> {
    let t0 = Instant::now();
    let opts = EvalOptions::with_precision(c.precision);
    let z = pfaffian_path(e, c.n, p, &opts)?;
    let z0 = pfaffian_path(e, c.n, &empty(), &opts)?;
    let normalized = z.value / z0.value;
    Ok(MethodResult {
        method: Method::Pfaffian,
        value: pick(c, z.value, normalized),
        raw: Some(z.value),
        normalized,
        std_err: None,
        error_estimate: None,
        regime: Some(z.regime),
        d: Some(z.d),
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
        diagnostics: Some(z.diagnostics),
    })
}

fn run_quadrature(c: &RunConfig, e: &Ensemble, p: &SpectralParams) -> Result<MethodResult> {
    let t0 = Instant::now();
    let q = QuadratureSpec { nodes_per_dim: c.quadrature_nodes, ..Default::default() };
    let z = z_eigenvalue_quadrature(e, c.n, p, &q)?;
    let z0 = z_eigenvalue_quadrature(e, c.n, &empty(), &q)?;
    let normalized = z.value / z0.value;
    Ok(MethodResult {
        method: Method::OracleQuadrature,
        value: pick(c, z.value, normalized),
        raw: Some(z.value),
        normalized,
        std_err: None,
        error_estimate: Some(z.error),
        regime: None,
        d: None,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
        diagnostics: None,
    })
}

fn run_mc(c: &RunConfig, e: &Ensemble, p: &SpectralParams) -> Result<MethodResult> {
    let t0 = Instant::now();
    let r = z_matrix_montecarlo(e, c.n, p, &MCSpec { samples: c.mc_samples, seed: c.seed })?;
    Ok(MethodResult {
        method: Method::OracleMc,
        value: r.mean,
        raw: None,
        normalized: r.mean,
        std_err: Some(r.std_err),
        error_estimate: None,
        regime: None,
        d: None,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
        diagnostics: None,
    })
}

pub fn cmd_compute(c: &RunConfig) -> Result<RunResult> {
    c.validate()?;
    let e = ensemble_of(c)?;
    let p = params_of(c)?;
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    let methods: Vec<Method> = match c.method {
        Method::All => vec![Method::Pfaffian, Method::OracleQuadrature, Method::OracleMc],
        m => vec![m],
    };
    for m in methods {
        match m {
            Method::Pfaffian => results.push(run_pfaffian(c, &e, &p)?),
            Method::OracleQuadrature => results.push(run_quadrature(c, &e, &p)?),
            Method::OracleMc => {
                if c.method == Method::All && !e.id().is_gauss() {
                    skipped.push(format!("oracle-mc: no matrix sampler for {}", e.id()));
                } else {
                    results.push(run_mc(c, &e, &p)?);
                }
            }
            Method::All => unreachable!(),
        }
    }
    let mut deviations = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            deviations.push(Deviation {
                a: results[i].method,
                b: results[j].method,
                rel: rel_dev(results[i].normalized, results[j].normalized),
            });
        }
    }
    Ok(RunResult {
        schema_version: SCHEMA_VERSION.into(),
        library_version: crate::VERSION.into(),
        config: c.clone(),
        results,
        deviations,
        skipped,
    })
}

/// Human-readable summary lines.
pub fn summary(r: &RunResult) -> String {
    let mut out = String::new();
    for m in &r.results {
        out.push_str(&format!("{:<18} {:>24.17e} {:>+24.17e}i", m.method.as_str(), m.value.re, m.value.im));
        if let Some(s) = m.std_err {
            out.push_str(&format!("  ± ({:.2e}, {:.2e})", s.re, s.im));
        }
        if let (Some(reg), Some(d)) = (m.regime, m.d) {
            out.push_str(&format!("  [{} d={d}]", reg.as_str()));
        }
        out.push_str(&format!("  {:.1} ms\n", m.elapsed_ms));
    }
    for d in &r.deviations {
        out.push_str(&format!("deviation {} vs {}: {:.3e}\n", d.a.as_str(), d.b.as_str(), d.rel));
    }
    for s in &r.skipped {
        out.push_str(&format!("skipped {s}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_instance_is_one_for_every_method() {
        let c = RunConfig { n: 2, method: Method::All, mc_samples: 1000, ..Default::default() };
        let r = cmd_compute(&c).unwrap();
        assert_eq!(r.results.len(), 3);
        for m in &r.results {
            assert!((m.value - 1.0).norm() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn symplectic_second_moment() {
        let c = RunConfig {
            ensemble: crate::ensembles::EnsembleId::GaussBeta4,
            n: 1,
            kappa2: vec![Complex64::new(0.0, 0.0)],
            ..Default::default()
        };
        let r = cmd_compute(&c).unwrap();
        assert!((r.results[0].value - 1.0).norm() < 1e-12);
    }
}
