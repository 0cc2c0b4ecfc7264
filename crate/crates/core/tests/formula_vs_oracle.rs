use pfrmt_core::ensembles::Ensemble;
use pfrmt_core::kernels::{z_goe, z_gse, EvalOptions, Regime};
use pfrmt_core::oracle::{z_eigenvalue_quadrature, QuadratureSpec};
use pfrmt_core::skew_linalg::SpectralParams;
use pfrmt_core::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(k1: usize, k2: usize) -> SpectralParams {
    let kappa1 = [c(0.3, 1.2), c(-0.7, 0.9), c(1.1, -1.0), c(0.2, -1.4)][..k1].to_vec();
    let kappa2 = [c(-0.4, 0.6), c(0.9, -0.3), c(0.5, 0.2), c(-1.2, -0.8)][..k2].to_vec();
    SpectralParams::new(kappa1, kappa2).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn goe_raw_values_match_quadrature() {
    let e = Ensemble::gauss_beta1();
    let opts = EvalOptions::default();
    let mut report = Vec::new();
    let mut worst: f64 = 0.0;
    for ndim in 1..=3 {
        for k1 in 0..=3 {
            for k2 in 0..=3 {
                let p = params(k1, k2);
                let z = z_goe(&e, ndim, &p, &opts).unwrap();
                let o = z_eigenvalue_quadrature(&e, ndim, &p, &QuadratureSpec::default()).unwrap();
                let r = rel(z.value, o.value);
                worst = worst.max(r);
                if r > 1e-7 {
                    report.push(format!("Ndim={ndim} k1={k1} k2={k2} {:?}: ratio {}", z.regime, z.value / o.value));
                }
            }
        }
    }
    assert!(report.is_empty(), "worst {worst:e}\n{}", report.join("\n"));
}

#[test]
fn gse_raw_values_match_quadrature() {
    let e = Ensemble::gauss_beta4();
    let opts = EvalOptions::default();
    let mut report = Vec::new();
    for n in 1..=2 {
        for k1 in 0..=2 {
            for k2 in 0..=2 {
                let p = params(k1, k2);
                let z = z_gse(&e, n, &p, &opts).unwrap();
                let o = z_eigenvalue_quadrature(&e, n, &p, &QuadratureSpec::default()).unwrap();
                if rel(z.value, o.value) > 1e-7 {
                    report.push(format!("N={n} k1={k1} k2={k2} {:?}: ratio {}", z.regime, z.value / o.value));
                }
            }
        }
    }
    assert!(report.is_empty(), "{}", report.join("\n"));
}

#[test]
fn regimes_all_exercised() {
    let e = Ensemble::gauss_beta1();
    let opts = EvalOptions::default();
    assert_eq!(z_goe(&e, 3, &params(1, 1), &opts).unwrap().regime, Regime::EvenSum);
    assert_eq!(z_goe(&e, 3, &params(1, 0), &opts).unwrap().regime, Regime::OddSum);
    assert_eq!(z_goe(&e, 2, &params(3, 0), &opts).unwrap().regime, Regime::Sparse);
}
