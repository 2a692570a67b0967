use approx::assert_relative_eq;
use proptest::prelude::*;
use satlab::conformal::{flatzoomer_phi, ConformalFactor};
use satlab::extension::{positive_extend, seeley_extend, SeeleyScheme, MAX_ORDER};
use satlab::grid::{build_box_manifold, ManifoldSpec, MetricField};
use satlab::satellite::{make_satellite, verify_identities};
use satlab::sequences::conformal_distortion;
use satlab::spectral::{solve_principal, Problem, SolverOptions};

#[test]
fn single_precision_tracks_double() {
    let spec = ManifoldSpec::bump_slab(8, 0.2);
    let m64 = build_box_manifold::<f64>(&spec).unwrap();
    let m32 = build_box_manifold::<f32>(&spec).unwrap();
    let loose = SolverOptions { tol: 1e-5, ..SolverOptions::default() };
    for p in [Problem::S0, Problem::S1] {
        let a = solve_principal(&m64, p, &SolverOptions::default()).unwrap();
        let b = solve_principal(&m32, p, &loose).unwrap();
        assert_relative_eq!(b.lambda as f64, a.lambda, max_relative = 1e-3);
        assert!(b.u.iter().all(|u| *u > 0.0));
    }
    let zero = ConformalFactor::constant(m32.len(), 0.0f32);
    let phi32 = flatzoomer_phi(&m32, &zero, 0).unwrap().sup;
    let phi64 = flatzoomer_phi(&m64, &ConformalFactor::constant(m64.len(), 0.0), 0).unwrap().sup;
    assert_relative_eq!(phi32 as f64, phi64, max_relative = 1e-4);
}

#[test]
fn single_precision_flat_satellite() {
    let m = build_box_manifold::<f32>(&ManifoldSpec::flat_slab(6)).unwrap();
    let s = make_satellite(&m, Problem::S1, &SolverOptions { tol: 1e-5, ..SolverOptions::default() }).unwrap();
    let r = verify_identities(&s);
    assert!(r.scalar_residual < 1e-3 && r.mean_residual.unwrap() < 1e-3, "{r:?}");
    assert_eq!(r.sign_law, None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn seeley_reproduces_random_polynomials(
        m in 0..=MAX_ORDER,
        coeffs in proptest::collection::vec(-2.0f64..2.0, MAX_ORDER + 1),
        h in 0.01f64..0.1,
    ) {
        let s = SeeleyScheme::<f64>::geometric(m).unwrap();
        let p = |t: f64| coeffs[..=m].iter().rev().fold(0.0, |acc, c| acc * t + c);
        let f: Vec<f64> = (0..100).map(|i| p(i as f64 * h)).collect();
        let e = seeley_extend(&s, &f, 4).unwrap();
        for (k, v) in e.values.iter().enumerate() {
            let t = -((k + 1) as f64) * h;
            prop_assert!((v - p(t)).abs() < 1e-9, "m = {}, t = {}", m, t);
        }
    }

    #[test]
    fn positive_extension_stays_above_beta(
        m in 1..=MAX_ORDER,
        u in proptest::collection::vec(0.05f64..20.0, 40),
    ) {
        let s = SeeleyScheme::<f64>::geometric(m).unwrap();
        let e = positive_extend(&s, &u, 5, None).unwrap();
        prop_assert!(e.beta > 0.0);
        prop_assert!(e.values.iter().all(|v| *v >= e.beta));
    }

    #[test]
    fn distortion_ignores_common_scale(
        d in proptest::collection::vec(0.2f64..5.0, 3),
        c in 0.1f64..10.0,
    ) {
        let diag = |x: &[f64], s: f64| vec![s * x[0], 0.0, 0.0, 0.0, s * x[1], 0.0, 0.0, 0.0, s * x[2]];
        let g1 = MetricField::from_vec(3, diag(&[1.0, 1.0, 1.0], 1.0)).unwrap();
        let g2 = MetricField::from_vec(3, diag(&d, 1.0)).unwrap();
        let spread = d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min);
        let base = conformal_distortion(&g1, &g2, &[0]).unwrap();
        prop_assert!((base - spread).abs() < 1e-12 * spread.max(1.0));
        let g1c = MetricField::from_vec(3, diag(&[1.0, 1.0, 1.0], c)).unwrap();
        let g2c = MetricField::from_vec(3, diag(&d, c)).unwrap();
        let scaled = conformal_distortion(&g1c, &g2c, &[0]).unwrap();
        prop_assert!((scaled - base).abs() < 1e-12 * base.max(1.0));
    }
}
