use proptest::prelude::*;

use pfrmt_core::cli::verify::random_point_measure;
use pfrmt_core::ensembles::Ensemble;
use pfrmt_core::kernels::{kernel_k11, z_goe, z_gse, z_pfaffian, EvalOptions, KernelSet, Parity};
use pfrmt_core::skew_linalg::{det, pfaffian, DenseMatrix, SkewMatrix, SpectralParams};
use pfrmt_core::{Complex64, Precision};

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(re, im)| Complex64::new(re, im))
}

fn skew(dim: usize) -> impl Strategy<Value = SkewMatrix<f64>> {
    prop::collection::vec(complex(1.0), dim * dim).prop_map(move |v| SkewMatrix::from_upper(dim, |i, j| v[i * dim + j]))
}

/// Shift sets with `κ₁` at least 0.8 from the real axis and all shifts pairwise separated.
fn shifts(max_k1: usize, max_k2: usize) -> impl Strategy<Value = SpectralParams> {
    let away = (-1.5..1.5f64, 0.8..2.0f64, any::<bool>())
        .prop_map(|(re, im, up)| Complex64::new(re, if up { im } else { -im }));
    (prop::collection::vec(away, 0..=max_k1), prop::collection::vec(complex(2.0), 0..=max_k2))
        .prop_filter("separated shifts", |(a, b)| {
            let all: Vec<_> = a.iter().chain(b).collect();
            all.iter().enumerate().all(|(i, x)| all[i + 1..].iter().all(|y| (*x - *y).norm() > 0.15))
                && a.iter().all(|x| b.iter().all(|y| (x - y).norm() > 0.15))
        })
        .prop_map(|(a, b)| SpectralParams::new(a, b).unwrap())
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfaffian_squared_is_determinant(a in (1usize..7).prop_flat_map(|h| skew(2 * h))) {
        let pf = pfaffian(&a).unwrap();
        let d = det(&a.to_dense()).unwrap();
        prop_assert!((pf * pf - d).norm() <= 1e-10 * d.norm().max(1.0));
    }

    #[test]
    fn pfaffian_under_congruence(
        (a, b) in (1usize..5).prop_flat_map(|h| (skew(2 * h), prop::collection::vec(complex(1.0), 4 * h * h)))
    ) {
        let n = a.dim();
        let bm = DenseMatrix::from_fn(n, n, |i, j| b[i * n + j]);
        let x = bm.matmul(&a.to_dense()).matmul(&bm.transpose());
        let c = SkewMatrix::from_dense(&x, 1e-12).unwrap();
        let lhs = pfaffian(&c).unwrap();
        let rhs = det(&bm).unwrap() * pfaffian(&a).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn pfaffian_is_odd_under_row_column_swap(a in (2usize..6).prop_flat_map(|h| skew(2 * h)), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let mut perm: Vec<usize> = (0..a.dim()).collect();
        perm.swap(i, j);
        let s = a.permuted(&perm);
        let (p, q) = (pfaffian(&a).unwrap(), pfaffian(&s).unwrap());
        prop_assert!((p + q).norm() <= 1e-11 * p.norm().max(1.0));
    }

    #[test]
    fn point_measure_formula_matches_brute_force(seed in 0u64..1000, n in 0usize..3, odd in any::<bool>(), p in shifts(3, 3)) {
        prop_assume!(odd || n > 0);
        let parity = if odd { Parity::Odd } else { Parity::Even };
        let m = random_point_measure(seed, odd);
        let z = z_pfaffian(&m, n, &p, parity).unwrap().value;
        let b = m.brute_z(n, &p.kappa1, &p.kappa2, odd);
        prop_assert!((z - b).norm() <= 1e-8 * b.norm().max(1e-3), "{z} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn goe_average_is_symmetric_in_each_shift_set(ndim in 1usize..4, p in shifts(3, 3)) {
        let e = Ensemble::gauss_beta1();
        let opts = EvalOptions::default();
        let z = z_goe(&e, ndim, &p, &opts).unwrap().value;
        let mut r = p.clone();
        r.kappa1.reverse();
        let k2 = r.kappa2.len();
        r.kappa2.rotate_left(1.min(k2));
        let w = z_goe(&e, ndim, &r, &opts).unwrap().value;
        prop_assert!(rel(w, z) < 1e-9, "{z} vs {w}");
    }

    #[test]
    fn real_weight_commutes_with_conjugation(ndim in 1usize..4, p in shifts(3, 3)) {
        let e = Ensemble::gauss_beta1();
        let opts = EvalOptions::default();
        let z = z_goe(&e, ndim, &p, &opts).unwrap().value;
        let conj = SpectralParams::new(
            p.kappa1.iter().map(|k| k.conj()).collect(),
            p.kappa2.iter().map(|k| k.conj()).collect(),
        ).unwrap();
        let w = z_goe(&e, ndim, &conj, &opts).unwrap().value;
        prop_assert!(rel(w, z.conj()) < 1e-9, "{z} vs {w}");
    }

    #[test]
    fn gse_average_is_symmetric_in_each_shift_set(n in 1usize..3, p in shifts(2, 2)) {
        let e = Ensemble::gauss_beta4();
        let opts = EvalOptions::default();
        let z = z_gse(&e, n, &p, &opts).unwrap().value;
        let r = SpectralParams::new(p.kappa1.iter().rev().copied().collect(), p.kappa2.iter().rev().copied().collect()).unwrap();
        let w = z_gse(&e, n, &r, &opts).unwrap().value;
        prop_assert!(rel(w, z) < 1e-9, "{z} vs {w}");
    }

    #[test]
    fn k11_is_antisymmetric(x in complex(1.5), y in complex(1.5)) {
        prop_assume!(x.im.abs() > 0.2 && y.im.abs() > 0.2);
        let e = Ensemble::gauss_beta4();
        let ks = KernelSet::new(&e, 4, Parity::Even, Precision::Double).unwrap();
        let (a, b) = (kernel_k11(&ks, x, y), kernel_k11(&ks, y, x));
        prop_assert!((a + b).norm() <= 1e-12 * a.norm().max(1.0));
    }
}
