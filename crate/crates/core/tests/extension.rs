use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satlab::extension::*;
use satlab::grid::{build_box_manifold, Axis, DiscreteManifold, Lattice, ManifoldSpec, MetricField};
use satlab::Error;

/// `a_k = prod_{i != k} (1 + b_i) / (b_i - b_k)`: Lagrange weights at the
/// nodes `-b_i` evaluated at 1, which is what the moment rows encode.
fn lagrange_weights(b: &[f64]) -> Vec<f64> {
    (0..b.len())
        .map(|k| (0..b.len()).filter(|&i| i != k).map(|i| (1.0 + b[i]) / (b[i] - b[k])).product())
        .collect()
}

#[test]
fn three_node_scheme_by_hand() {
    // b = (1, 2, 4): a = (5, -5, 1)
    let s = SeeleyScheme::new(vec![1.0, 2.0, 4.0]).unwrap();
    let want = lagrange_weights(&[1.0, 2.0, 4.0]);
    assert_eq!(want, vec![5.0, -5.0, 1.0]);
    for (a, w) in s.coefficients().iter().zip(&want) {
        assert!((a - w).abs() < 1e-12);
    }
    let h = 0.1;
    let f: Vec<f64> = (0..41).map(|i| (i as f64 * h).powi(2)).collect();
    let e = seeley_extend(&s, &f, 10).unwrap();
    assert!(!e.clamped);
    for (j, v) in e.values.iter().enumerate() {
        let t = (j + 1) as f64 * h;
        assert!((v - t * t).abs() < 1e-10, "{v} vs {}", t * t);
    }
}

#[test]
fn polynomial_reproduction_up_to_order_four() {
    let h = 0.05;
    for m in 0..=MAX_ORDER {
        let s = SeeleyScheme::<f64>::geometric(m).unwrap();
        let b: Vec<f64> = (0..=m).map(|k| 2f64.powi(k as i32)).collect();
        for (a, w) in s.coefficients().iter().zip(lagrange_weights(&b)) {
            assert!((a - w).abs() < 1e-9 * w.abs().max(1.0), "m = {m}");
        }
        for j in 0..=m {
            let f: Vec<f64> = (0..81).map(|i| (i as f64 * h).powi(j as i32)).collect();
            let e = seeley_extend(&s, &f, 5).unwrap();
            assert!(!e.clamped);
            for (k, v) in e.values.iter().enumerate() {
                let t = -((k + 1) as f64) * h;
                assert!((v - t.powi(j as i32)).abs() < 1e-10, "m = {m}, degree {j}");
            }
        }
    }
}

#[test]
fn constants_and_odd_reflection() {
    for m in 0..=MAX_ORDER {
        let s = SeeleyScheme::<f64>::geometric(m).unwrap();
        let e = seeley_extend(&s, &[1.0; 40], 2).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
    let s = SeeleyScheme::<f64>::geometric(1).unwrap();
    let f: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
    let e = seeley_extend(&s, &f, 4).unwrap();
    for (j, v) in e.values.iter().enumerate() {
        assert_eq!(*v, -((j + 1) as f64) * 0.25);
    }
}

#[test]
fn extension_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = SeeleyScheme::<f64>::geometric(3).unwrap();
    let f: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (al, be) = (0.7, -1.3);
    let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| al * x + be * y).collect();
    let (ef, eg, em) = (
        seeley_extend(&s, &f, 6).unwrap(),
        seeley_extend(&s, &g, 6).unwrap(),
        seeley_extend(&s, &mix, 6).unwrap(),
    );
    for i in 0..6 {
        assert!((em.values[i] - (al * ef.values[i] + be * eg.values[i])).abs() < 1e-12);
    }
}

#[test]
fn range_overflow_is_flagged() {
    let s = SeeleyScheme::<f64>::geometric(2).unwrap();
    let e = seeley_extend(&s, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3).unwrap();
    assert!(e.clamped);
    assert!(matches!(SeeleyScheme::new(vec![1.0, 3.0, 3.0]), Err(Error::Scheme(_))));
}

#[test]
fn non_integer_nodes_interpolate() {
    // b = (1, 1.5) needs samples between nodes; linear data is reproduced
    let s = SeeleyScheme::new(vec![1.0, 1.5]).unwrap();
    let f: Vec<f64> = (0..30).map(|i| 2.0 - 0.3 * i as f64).collect();
    let e = seeley_extend(&s, &f, 5).unwrap();
    for (j, v) in e.values.iter().enumerate() {
        assert!((v - (2.0 + 0.3 * (j + 1) as f64)).abs() < 1e-12);
    }
}

#[test]
fn positive_extension() {
    let s = SeeleyScheme::<f64>::geometric(1).unwrap();
    let e = positive_extend(&s, &[0.3; 12], 3, None).unwrap();
    assert!(e.values.iter().all(|v| (v - 0.3).abs() < 1e-15));

    // u = 1 + t: F(u)(-t) = (1 + t)^3 / (1 + 2t)^2
    let h = 0.1;
    let u: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * h).collect();
    let e = positive_extend(&s, &u, 8, None).unwrap();
    for (j, v) in e.values.iter().enumerate() {
        let t = (j + 1) as f64 * h;
        let want = (1.0 + t).powi(3) / (1.0 + 2.0 * t).powi(2);
        assert!(*v > 0.0 && (v - want).abs() < 1e-12 * want);
    }

    assert!(matches!(positive_extend(&s, &[1.0, 0.0, 2.0], 1, None), Err(Error::NonPositive { node: 1, .. })));
}

#[test]
fn positive_extension_respects_beta() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for m in [1, 2, 3] {
        let s = SeeleyScheme::<f64>::geometric(m).unwrap();
        let abs: f64 = s.coefficients().iter().map(|a| a.abs()).sum();
        for _ in 0..100 {
            let mut u: Vec<f64> = (0..64).map(|_| rng.gen_range(0.5..3.0)).collect();
            let k = rng.gen_range(0..64);
            u[k] = 0.5;
            let sup = u.iter().cloned().fold(0.0, f64::max);
            let beta = (-abs * 0.5f64.ln().abs() - abs * (sup.ln().abs() - 0.5f64.ln().abs()).max(0.0)).exp();
            let e = positive_extend(&s, &u, 7, Some(0.5)).unwrap();
            assert!((e.beta - beta).abs() < 1e-14 * beta);
            assert!(beta > 0.0);
            assert!(e.values.iter().all(|v| *v >= beta), "m = {m}");
        }
    }
}

fn scheme() -> SeeleyScheme<f64> {
    SeeleyScheme::geometric(2).unwrap()
}

#[test]
fn flat_slab_extends_to_identity() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::flat_slab(17)).unwrap();
    let x = extend_metric(&m, &scheme(), 0.25).unwrap();
    assert_eq!(x.layers, vec![(0, 0), (0, 0), (4, 4)]);
    assert!(!x.clamped);
    let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    for v in 0..x.manifold.len() {
        assert_eq!(x.manifold.metric().at(v), &id);
    }
    let ax = x.manifold.lattice().axis(2);
    assert_eq!((ax.lo(), ax.hi()), (-0.25, 1.25));
}

fn normal_polynomial_slab(nodes: usize, eps: f64) -> DiscreteManifold<f64> {
    let lat = Lattice::new(vec![
        Axis::periodic(0.0, 1.0, nodes),
        Axis::periodic(0.0, 1.0, nodes),
        Axis::interval(0.0, 1.0, nodes),
    ]);
    let metric = MetricField::from_fn(&lat, |x| {
        let e = (2.0 * eps * phi(x[2])).exp();
        vec![e, 0.0, 0.0, 0.0, e, 0.0, 0.0, 0.0, e]
    });
    let bp = lat.node(&[nodes / 2, nodes / 2, nodes / 2]);
    DiscreteManifold::new(lat, metric, bp).unwrap()
}

fn phi(t: f64) -> f64 {
    t - 1.5 * t * t
}

#[test]
fn metric_extension_matches_analytic_continuation() {
    let eps = 0.2;
    let m = normal_polynomial_slab(17, eps);
    let x = extend_metric(&m, &scheme(), 0.25).unwrap();
    assert!(!x.clamped);
    let lat = x.manifold.lattice();
    let mut worst: f64 = 0.0;
    for v in 0..x.manifold.len() {
        let t = lat.coords(v)[2];
        let want = (2.0 * eps * phi(t)).exp();
        let g = x.manifold.metric().at(v);
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { want } else { 0.0 };
                worst = worst.max((g[i * 3 + j] - w).abs());
            }
        }
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn restriction_and_positivity() {
    for spec in [ManifoldSpec::bump_slab(12, 0.3), ManifoldSpec::cylinder(10)] {
        let m = build_box_manifold::<f64>(&spec).unwrap();
        let x = extend_metric(&m, &scheme(), 0.2).unwrap();
        assert!(x.min_eigenvalue > 0.0);
        assert!(x.floor_holds, "{}", x.report());
        assert_eq!(x.manifold.lattice().coords(x.manifold.basepoint()), m.lattice().coords(m.basepoint()));
        for v in 0..m.len() {
            let w = x.embed(v);
            assert_eq!(x.manifold.metric().at(w), m.metric().at(v));
            assert_eq!(x.manifold.lattice().coords(w), m.lattice().coords(v));
        }
    }
}

#[test]
fn positive_field_extension_on_manifold() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::bump_slab(10, 0.2)).unwrap();
    let x = extend_metric(&m, &scheme(), 0.25).unwrap();
    let u: Vec<f64> = (0..m.len()).map(|v| 1.0 + 0.5 * m.lattice().coords(v)[2].powi(2)).collect();
    let (f, beta) = x.extend_positive(&scheme(), &u).unwrap();
    assert!(f.iter().all(|y| *y >= beta && *y > 0.0));
    for v in 0..m.len() {
        assert_eq!(f[x.embed(v)], u[v]);
    }
}

fn height_opts(r2: f64) -> HeightOptions {
    HeightOptions { r2, band: None, c: 4.0 }
}

#[test]
fn height_function_on_flat_slab() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::flat_slab(33)).unwrap();
    let x = extend_metric(&m, &scheme(), 0.125).unwrap();
    let r2 = 0.5;
    let hf = build_height_function(&x, &height_opts(r2)).unwrap();
    let lat = x.manifold.lattice();
    for v in 0..x.manifold.len() {
        let t = lat.coords(v)[2];
        let f = hf.f[v];
        if t <= r2 / 4.0 + 1e-12 {
            assert!((f - t).abs() < 1e-12, "t = {t}: {f}");
        } else if t >= 1.0 - r2 / 4.0 - 1e-12 {
            assert!((f - (1.0 - t)).abs() < 1e-12);
        } else if t >= r2 / 2.0 && t <= 1.0 - r2 / 2.0 {
            assert_eq!(f, r2 / 2.0);
        } else {
            assert!(f > r2 / 4.0 && f < r2 / 2.0);
        }
    }
    assert_eq!(hf.f[x.manifold.basepoint()], r2 / 2.0);
    assert!(hf.band_nodes > 0);
    assert!(hf.slope >= 0.9 && hf.slope <= 1.0 + 1e-12, "{}", hf.slope);
    assert!(hf.slope_ok());
    // the zero level is the original boundary
    let zeros = hf.zero_nodes();
    assert_eq!(zeros.len(), 2 * 33 * 33);
    assert!(zeros.iter().all(|&v| x.restrict(v).is_some_and(|w| m.lattice().is_boundary(w))));
}

#[test]
fn height_function_rejects_bad_windows() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::flat_slab(9)).unwrap();
    let x = extend_metric(&m, &scheme(), 0.25).unwrap();
    assert!(matches!(build_height_function(&x, &height_opts(0.3)), Err(Error::Height(_))));
    assert!(matches!(build_height_function(&x, &height_opts(2.5)), Err(Error::Height(_))));
    let shallow = extend_metric(&build_box_manifold::<f64>(&ManifoldSpec::flat_slab(33)).unwrap(), &scheme(), 0.03).unwrap();
    assert!(matches!(build_height_function(&shallow, &height_opts(0.5)), Err(Error::Height(_))));
}

#[test]
fn cut_round_trip() {
    for spec in [ManifoldSpec::flat_slab(17), ManifoldSpec::bump_slab(17, 0.1)] {
        let m = build_box_manifold::<f64>(&spec).unwrap();
        let x = extend_metric(&m, &scheme(), 0.25).unwrap();
        let hf = build_height_function(&x, &height_opts(0.8)).unwrap();
        let back = cut_manifold(&x.manifold, &hf).unwrap();
        assert_eq!(back.lattice(), m.lattice());
        assert_eq!(back.metric(), m.metric());
        assert_eq!(back.basepoint(), m.basepoint());
    }
}

#[test]
fn shifted_level_moves_boundary_one_layer() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::flat_slab(17)).unwrap();
    let x = extend_metric(&m, &scheme(), 0.25).unwrap();
    let hf = build_height_function(&x, &height_opts(0.8)).unwrap();
    let h = m.lattice().axis(2).h;
    let wide = cut_manifold(&x.manifold, &hf.shifted(h / 2.0)).unwrap();
    let ax = wide.lattice().axis(2);
    assert_eq!(ax.nodes, 19);
    assert_eq!((ax.lo(), ax.hi()), (-h, 1.0 + h));
    assert!(matches!(cut_manifold(&x.manifold, &hf.shifted(1.0)), Err(Error::Cut(_))));
}

#[test]
fn flow_on_flat_slab_is_straight() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::flat_slab(17)).unwrap();
    let x = extend_metric(&m, &scheme(), 0.25).unwrap();
    let hf = build_height_function(&x, &height_opts(0.8)).unwrap();
    let opts = FlowOptions::default();
    let start = x.embed(m.lattice().node(&[3, 5, 0]));
    let p0 = x.manifold.lattice().coords(start);

    let still = flow_to_level(&x.manifold, &hf, start, 0.0, &opts).unwrap();
    assert_eq!(still.time, 0.0);
    assert_eq!(still.point, p0);

    for target in [0.07, -0.09] {
        let r = flow_to_level(&x.manifold, &hf, start, target, &opts).unwrap();
        assert!((r.value - target).abs() <= 1e-6);
        assert!((r.time - target.abs()).abs() < 1e-8, "{} vs {target}", r.time);
        assert!((r.point[0] - p0[0]).abs() < 1e-12 && (r.point[1] - p0[1]).abs() < 1e-12);
        assert!((r.point[2] - target).abs() < 1e-8);
        assert!(r.within_bound);
    }
}

#[test]
fn flow_time_bound_on_perturbed_metric() {
    let m = build_box_manifold::<f64>(&ManifoldSpec::bump_slab(17, 0.1)).unwrap();
    let x = extend_metric(&m, &scheme(), 0.25).unwrap();
    let hf = build_height_function(&x, &height_opts(0.8)).unwrap();
    assert!(hf.slope_ok());
    let opts = FlowOptions::default();
    for idx in [[0, 0, 0], [4, 9, 0], [7, 2, 16], [12, 12, 1]] {
        let start = x.embed(m.lattice().node(&idx));
        for target in [-hf.band * 0.8, hf.band * 0.5] {
            let r = flow_to_level(&x.manifold, &hf, start, target, &opts).unwrap();
            assert!((r.value - target).abs() <= 1e-6);
            assert!(r.within_bound, "time {} > bound {}", r.time, r.bound);
        }
    }
    // a target far outside the band is not reachable along the gradient
    let start = x.embed(m.lattice().node(&[0, 0, 0]));
    assert!(matches!(flow_to_level(&x.manifold, &hf, start, 0.9, &opts), Err(Error::LeftBand { .. })));
}
