use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satlab::grid::{build_box_manifold, DiscreteManifold, ManifoldSpec, MetricField};
use satlab::sequences::*;
use satlab::spectral::{Problem, SolverOptions};
use satlab::Error;

fn family(nodes: usize, base: f64, amplitude: f64) -> ManifoldSpec {
    let mut s = ManifoldSpec::flat_slab(nodes)
        .with_param("base_amplitude", base)
        .with_param("amplitude", amplitude);
    s.metric = "perturbed-sequence".into();
    s
}

fn node_sup_profile(m: &DiscreteManifold<f64>) -> f64 {
    let tau = std::f64::consts::TAU;
    (0..m.len())
        .map(|v| {
            let x = m.lattice().coords(v);
            ((tau * x[0]).sin() * (tau * x[1]).sin()).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn constant_family() {
    let mut spec = SequenceSpec::new(family(8, 0.1, 0.0), 3);
    spec.k = 0;
    let seq = generate_sequence::<f64>(&spec).unwrap();
    for m in &seq.members {
        assert_eq!(m.metric(), seq.limit.metric());
    }
    assert!(seq.ck.iter().all(|d| *d == 0.0));
}

#[test]
fn inverse_index_family_c0_distance() {
    let mut spec = SequenceSpec::new(family(8, 0.0, 0.3), 8);
    spec.k = 0;
    let seq = generate_sequence::<f64>(&spec).unwrap();
    let sup = node_sup_profile(&seq.limit);
    for (i, d) in seq.ck.iter().enumerate() {
        let want = 0.3 / (i + 1) as f64 * sup;
        assert!((d - want).abs() < 1e-14, "{d} vs {want}");
    }
    for k in 1..=4 {
        let r = seq.ck[2 * k - 1] / seq.ck[k - 1];
        assert!((r - 0.5).abs() < 1e-12);
    }
}

#[test]
fn ck_trace_halves_on_doubling() {
    let spec = SequenceSpec::new(family(9, 0.1, 0.2), 8);
    let seq = generate_sequence::<f64>(&spec).unwrap();
    assert_eq!(seq.k, 2);
    for k in 1..=4 {
        let r = seq.ck[2 * k - 1] / seq.ck[k - 1];
        assert!((r - 0.5).abs() < 1e-10, "{r}");
    }
}

#[test]
fn spd_failure_names_the_index() {
    // g_00 = 1 + a sin sin is not positive for |a| > 1
    let spec = SequenceSpec::new(family(8, 0.0, 1.5), 3);
    match generate_sequence::<f64>(&spec) {
        Err(Error::Sequence { index: 1, source }) => assert!(matches!(*source, Error::NotPositiveDefinite { .. })),
        other => panic!("unexpected {other:?}"),
    }
    let mut bad = SequenceSpec::new(ManifoldSpec::flat_slab(6), 3);
    assert!(generate_sequence::<f64>(&bad).is_err());
    bad.manifold = family(6, 0.0, 0.1);
    bad.count = 1;
    assert!(generate_sequence::<f64>(&bad).is_err());
}

#[test]
fn distortion_properties() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::bump_slab(7, 0.2)).unwrap();
    let all: Vec<usize> = (0..m.len()).collect();
    let g = m.metric();
    assert_eq!(conformal_distortion(g, g, &all).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let phi: Vec<f64> = (0..m.len()).map(|_| rng.gen_range(0.2..5.0)).collect();
    assert!(conformal_distortion(g, &g.scaled(&phi), &all).unwrap() < 1e-13);
    assert!(conformal_distortion(g, &g.scaled(&vec![(2.0f64 * 0.7).exp(); m.len()]), &all).unwrap() < 1e-13);

    // anisotropic second metric: invariant under common constant scaling
    let seq = build_box_manifold::<f64>(&family(7, 0.2, 0.3)).unwrap();
    let h = seq.metric();
    let d = conformal_distortion(g, h, &all).unwrap();
    assert!(d > 0.1);
    let c = vec![3.7; m.len()];
    let ds = conformal_distortion(&g.scaled(&c), &h.scaled(&c), &all).unwrap();
    assert!((d - ds).abs() < 1e-13 * d);
}

#[test]
fn ck_distance_zero_and_linear() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::bump_slab(9, 0.1)).unwrap();
    assert_eq!(ck_distance(&m, m.metric(), 2, None).unwrap(), 0.0);
    let n = 3;
    // constant delta
    let delta = [0.1, 0.02, 0.0, 0.02, 0.05, 0.0, 0.0, 0.0, -0.03];
    let shifted = |t: f64| {
        let mut data = m.metric().raw().to_vec();
        for v in 0..m.len() {
            for i in 0..n * n {
                data[v * n * n + i] += t * delta[i];
            }
        }
        MetricField::from_vec(n, data).unwrap()
    };
    let d1 = ck_distance_terms(&m, &shifted(1.0), 2, None).unwrap();
    for t in [0.25, 0.5, 2.0] {
        let dt = ck_distance_terms(&m, &shifted(t), 2, None).unwrap();
        for (a, b) in dt.iter().zip(&d1) {
            assert!((a - t * b).abs() < 1e-10 * b.max(1.0));
        }
        let total = ck_distance(&m, &shifted(t), 2, None).unwrap();
        assert!((total - t * ck_distance(&m, &shifted(1.0), 2, None).unwrap()).abs() < 1e-10);
    }
}

/// First-order term for `delta = a sin(2 pi x) sin(2 pi y) dx dx` on the
/// flat slab: `|nabla delta| = a |grad p|`, whose sup is `2 pi a`.
fn first_order_error(nodes: usize) -> f64 {
    let a = 0.01;
    let spec = family(nodes, 0.0, a);
    let limit = build_box_manifold::<f64>(&family(nodes, 0.0, 0.0)).unwrap();
    let m = build_box_manifold::<f64>(&spec).unwrap();
    let terms = ck_distance_terms(&limit, m.metric(), 1, None).unwrap();
    (terms[1] - std::f64::consts::TAU * a).abs()
}

#[test]
fn ck_distance_two_resolutions() {
    let (e1, e2) = (first_order_error(12), first_order_error(24));
    println!("first-order term error {e1:e} -> {e2:e}");
    assert!(e2 < 2e-2 * std::f64::consts::TAU * 0.01);
    assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "{}", e1 / e2);
}

#[test]
fn ck_distance_nearly_symmetric() {
    let a = build_box_manifold::<f64>(&family(9, 0.1, 1e-3)).unwrap();
    let b = build_box_manifold::<f64>(&family(9, 0.1, 0.0)).unwrap();
    let ab = ck_distance(&a, b.metric(), 1, None).unwrap();
    let ba = ck_distance(&b, a.metric(), 1, None).unwrap();
    assert!((ab - ba).abs() < 1e-2 * ab, "{ab} vs {ba}");
}

#[test]
fn epsilon_isometry_identity_and_scaling() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::bump_slab(7, 0.2)).unwrap();
    let id: Vec<usize> = (0..m.len()).collect();
    let e = epsilon_isometry_check(&m, &m, &id, 6, 11, 0.3).unwrap();
    assert_eq!(e.epsilon, 0.0);
    assert!(e.covers);
    assert_eq!(e.coverage_slack, 0.0);

    let c = 1.3;
    let big = m.with_metric(m.metric().scaled(&vec![c * c; m.len()])).unwrap();
    let e = epsilon_isometry_check(&m, &big, &id, 6, 11, 0.3).unwrap();
    assert!(e.pairs > 0);
    assert!((e.epsilon - (c - 1.0) * e.max_distance).abs() < 1e-12, "{} vs {}", e.epsilon, (c - 1.0) * e.max_distance);

    // a map missing half the nodes leaves part of the target uncovered
    let folded: Vec<usize> = (0..m.len()).map(|v| v - v % 2).collect();
    let e = epsilon_isometry_check(&m, &m, &folded, 6, 11, 0.5).unwrap();
    assert!(e.coverage_slack > 0.0);
}

#[test]
fn epsilon_composition_bound() {
    let specs = [family(7, 0.1, 0.0), family(7, 0.1, 0.2), family(7, 0.1, -0.3)];
    let ms: Vec<_> = specs.iter().map(|s| build_box_manifold::<f64>(s).unwrap()).collect();
    let id: Vec<usize> = (0..ms[0].len()).collect();
    let e = |a: usize, b: usize| epsilon_isometry_check(&ms[a], &ms[b], &id, 10, 5, 0.3).unwrap().epsilon;
    let (e01, e12, e02) = (e(0, 1), e(1, 2), e(0, 2));
    assert!(e02 <= e01 + e12 + 1e-14, "{e02} > {e01} + {e12}");
    assert!(e01 > 0.0 && e12 > 0.0);
}

#[test]
fn satellite_diagnostics_s1_family() {
    let mut spec = SequenceSpec::new(family(8, 0.1, 0.3), 8);
    spec.problem = Problem::S1;
    let d = satellite_sequence_diagnostics::<f64>(&spec, &SolverOptions::default()).unwrap();
    println!("{}", d.verdict_text());
    for r in &d.rows {
        println!("{:?} {:?} {:?} {:?}", r.lambda, r.distortion, r.epsilon, r.harnack);
    }
    assert_eq!(d.rows.len(), 8);
    assert!(!d.verdicts.partial);
    assert!(d.verdicts.envelope);
    assert_eq!(d.verdicts.cauchy, Some(true));
    assert_eq!(d.verdicts.distortion, Some(true));
    assert_eq!(d.verdicts.epsilon, Some(true));
    assert_ne!(d.verdicts.sign, Some(false));
    assert!(d.rows[7].distortion.unwrap() < 1e-13);
    assert!(d.rows.iter().all(|r| r.epsilon.unwrap() > 0.0));
    let table = d.table();
    assert_eq!(table.len(), 8);
    assert!(table.iter().all(|row| row.len() == TABLE_HEADER.len()));
}

#[test]
fn satellite_diagnostics_constant_family() {
    let mut spec = SequenceSpec::new(family(7, 0.1, 0.0), 3);
    spec.problem = Problem::S0;
    let d = satellite_sequence_diagnostics::<f64>(&spec, &SolverOptions::default()).unwrap();
    let l0 = d.rows[0].lambda.unwrap();
    for r in &d.rows {
        assert_eq!(r.lambda.unwrap(), l0);
        assert_eq!(r.distortion.unwrap(), 0.0);
        assert_eq!(r.epsilon.unwrap(), 0.0);
    }
    assert_eq!(d.verdicts.distortion, Some(true));
}
