//! `kernel-grid` and `skew-poly` CSV dumps.

use std::io::Write;

use clap::ValueEnum;
use num_complex::Complex64;

use super::config::RunConfig;
use crate::ensembles::PairMeasure;
use crate::error::{PfrmtError, Result};
use crate::kernels::{KernelSet, Parity};
use crate::skew_poly::{skew_orthogonalize, SkewPolynomialBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    K11,
    K12,
    K22,
}

/// Two straight complex segments sampled with `nx` and `ny` points (ends included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGrid {
    pub x_from: Complex64,
    pub x_to: Complex64,
    pub nx: usize,
    pub y_from: Complex64,
    pub y_to: Complex64,
    pub ny: usize,
}

fn linspace(a: Complex64, b: Complex64, n: usize) -> Vec<Complex64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * (i as f64 / (n - 1) as f64)).collect(),
    }
}

/// Moment block size and parity of the kernels belonging to a run config:
/// `d = Ndim` for β=1, `d = 2N` for β=4.
pub fn kernel_shape(c: &RunConfig) -> (usize, Parity) {
    if c.ensemble.beta() == 1 {
        (c.n, Parity::of_vars(c.n))
    } else {
        (2 * c.n, Parity::Even)
    }
}

pub fn kernel_set<'m>(m: &'m dyn PairMeasure, c: &RunConfig) -> Result<KernelSet<'m>> {
    let (d, parity) = kernel_shape(c);
    KernelSet::new(m, d, parity, c.precision)
}

/// Rows `(x, y, K(x, y))`, x-major.
pub fn kernel_grid(ks: &KernelSet, kind: KernelKind, g: &KernelGrid) -> Result<Vec<(Complex64, Complex64, Complex64)>> {
    let xs = linspace(g.x_from, g.x_to, g.nx);
    let ys = linspace(g.y_from, g.y_to, g.ny);
    if kind != KernelKind::K11 {
        if let Some(i) = xs.iter().position(|x| x.im == 0.0) {
            return Err(PfrmtError::OnSupport(format!("grid point x[{i}] = {} is on the real axis", xs[i])));
        }
    }
    if kind == KernelKind::K22 {
        if let Some(i) = ys.iter().position(|y| y.im == 0.0) {
            return Err(PfrmtError::OnSupport(format!("grid point y[{i}] = {} is on the real axis", ys[i])));
        }
    }
    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            let k = match kind {
                KernelKind::K11 => ks.k11(x, y),
                KernelKind::K12 => ks.k12(x, y)?,
                KernelKind::K22 => ks.k22(x, y)?,
            };
            rows.push((x, y, k));
        }
    }
    Ok(rows)
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_kernel_csv<W: Write>(rows: &[(Complex64, Complex64, Complex64)], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let io = |e: csv::Error| PfrmtError::Io(e.to_string());
    out.write_record(["re_x", "im_x", "re_y", "im_y", "re_K", "im_K"]).map_err(io)?;
    for (x, y, k) in rows {
        out.write_record([x.re, x.im, y.re, y.im, k.re, k.im].map(fmt_f64)).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

pub fn skew_basis(c: &RunConfig, d: usize) -> Result<SkewPolynomialBasis> {
    let e = super::compute::ensemble_of(c)?;
    if e.beta() == 1 && d % 2 == 1 {
        return Err(PfrmtError::Dimension("skew-orthogonal polynomials need an even d".into()));
    }
    skew_orthogonalize(&e.moment_matrix(d)?)
}

/// One polynomial per row: `degree, r, c0, …, c_{d-1}` where `r` is the
/// pairing norm of the pair the polynomial belongs to.
pub fn write_basis_csv<W: Write>(b: &SkewPolynomialBasis, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let io = |e: csv::Error| PfrmtError::Io(e.to_string());
    let mut header = vec!["degree".to_string(), "pairing_norm".to_string()];
    header.extend((0..b.d).map(|k| format!("c{k}")));
    out.write_record(&header).map_err(io)?;
    for (j, q) in b.coeffs.iter().enumerate() {
        let mut rec = vec![j.to_string(), fmt_f64(b.pairing_norms[j / 2])];
        rec.extend(q.iter().map(|&c| fmt_f64(c)));
        out.write_record(&rec).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}
