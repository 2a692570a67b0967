use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satlab::grid::{build_box_manifold, DiscreteManifold, ManifoldSpec, MetricField};
use satlab::spectral::*;

fn manifold(spec: &ManifoldSpec) -> DiscreteManifold<f64> {
    build_box_manifold(spec).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn flat_torus_closed_is_trivial() {
    let m = manifold(&ManifoldSpec::flat_torus(8));
    let sol = solve_principal(&m, Problem::Closed, &opts()).unwrap();
    assert!(sol.lambda.abs() < 1e-12, "{}", sol.lambda);
    assert!(sol.u.iter().all(|x| (x - 1.0).abs() < 1e-10));
    assert_eq!(sol.u[m.basepoint()], 1.0);
    let ops = assemble(&m).unwrap();
    let rep = eigen_bounds_check(&ops, &sol);
    assert!(rep.passes);
    assert_eq!(rep.bound, 0.0);
}

#[test]
fn flat_slab_boundary_problems_are_trivial() {
    let m = manifold(&ManifoldSpec::flat_slab(8));
    for p in [Problem::S0, Problem::S1] {
        let sol = solve_principal(&m, p, &opts()).unwrap();
        assert!(sol.lambda.abs() < 1e-12, "{p:?}: {}", sol.lambda);
        assert!(sol.u.iter().all(|x| (x - 1.0).abs() < 1e-9));
        let ops = assemble(&m).unwrap();
        assert!(eigen_bounds_check(&ops, &sol).passes);
        let ones = vec![1.0; m.len()];
        assert_eq!(rayleigh_quotient(&ops, &ones, p).unwrap(), 0.0);
    }
}

#[test]
fn wrong_problem_kind_is_rejected() {
    let torus = manifold(&ManifoldSpec::flat_torus(6));
    assert!(solve_principal(&torus, Problem::S1, &opts()).is_err());
    let slab = manifold(&ManifoldSpec::flat_slab(6));
    assert!(solve_principal(&slab, Problem::Closed, &opts()).is_err());
}

fn dense(ops: &OperatorPair<f64>) -> DMatrix<f64> {
    let q = ops.quadratic();
    let n = q.dim();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for (j, v) in q.row(i) {
            d[(i, j)] = v;
        }
    }
    d
}

fn dense_min_eigen(a: &DMatrix<f64>, w: &[f64]) -> f64 {
    let s: Vec<f64> = w.iter().map(|x| 1.0 / x.sqrt()).collect();
    let n = a.nrows();
    let c = DMatrix::from_fn(n, n, |i, j| s[i] * a[(i, j)] * s[j]);
    SymmetricEigen::new(c).eigenvalues.min()
}

#[test]
fn s1_matches_dense_oracle() {
    let m = manifold(&ManifoldSpec::bump_slab(8, 0.2));
    let ops = assemble(&m).unwrap();
    let sol = solve_principal_with(&m, &ops, Problem::S1, &opts()).unwrap();
    let oracle = dense_min_eigen(&dense(&ops), &ops.mass);
    println!("s1 lambda {} oracle {}", sol.lambda, oracle);
    assert!((sol.lambda - oracle).abs() < 1e-8 * oracle.abs().max(1.0));
}

#[test]
fn s0_matches_dense_schur_oracle() {
    let m = manifold(&ManifoldSpec::bump_slab(8, 0.2));
    let ops = assemble(&m).unwrap();
    let sol = solve_principal_with(&m, &ops, Problem::S0, &opts()).unwrap();
    let a = dense(&ops);
    let bnodes: Vec<usize> = (0..m.len()).filter(|&v| ops.boundary_mass[v] > 0.0).collect();
    let inodes: Vec<usize> = (0..m.len()).filter(|&v| ops.boundary_mass[v] == 0.0).collect();
    let sub = |r: &[usize], c: &[usize]| DMatrix::from_fn(r.len(), c.len(), |i, j| a[(r[i], c[j])]);
    let abb = sub(&bnodes, &bnodes);
    let abi = sub(&bnodes, &inodes);
    let aii = sub(&inodes, &inodes);
    let schur = &abb - &abi * aii.lu().solve(&abi.transpose()).unwrap();
    let schur = (&schur + schur.transpose()) * 0.5;
    let w: Vec<f64> = bnodes.iter().map(|&v| ops.boundary_mass[v]).collect();
    let oracle = dense_min_eigen(&schur, &w);
    println!("s0 lambda {} oracle {}", sol.lambda, oracle);
    assert!((sol.lambda - oracle).abs() < 1e-8 * oracle.abs().max(1.0));
    // interior equation L u = 0 holds to solver accuracy
    assert!(sol.pde_residual < 1e-9 && sol.boundary_residual < 1e-9);
}

#[test]
fn rayleigh_consistency_and_minimality() {
    let m = manifold(&ManifoldSpec::bump_slab(8, 0.2));
    let ops = assemble(&m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [Problem::S0, Problem::S1] {
        let sol = solve_principal_with(&m, &ops, p, &opts()).unwrap();
        let q = rayleigh_quotient(&ops, &sol.u, p).unwrap();
        assert!((q - sol.lambda).abs() < 1e-10 * sol.lambda.abs().max(1.0));
        for _ in 0..50 {
            let f: Vec<f64> = (0..m.len()).map(|_| rng.gen_range(0.1..2.0)).collect();
            let qf = rayleigh_quotient(&ops, &f, p).unwrap();
            assert!(qf >= sol.lambda - 1e-9);
            let scaled: Vec<f64> = f.iter().map(|x| 4.0 * x).collect();
            assert_eq!(rayleigh_quotient(&ops, &scaled, p).unwrap(), qf);
            let scaled: Vec<f64> = f.iter().map(|x| -0.37 * x).collect();
            assert!((rayleigh_quotient(&ops, &scaled, p).unwrap() - qf).abs() <= 1e-13 * qf.abs().max(1.0));
        }
        assert!(matches!(rayleigh_quotient(&ops, &vec![0.0; m.len()], p), Err(satlab::Error::ZeroDenominator)));
    }
}

#[test]
fn cylinder_constant_quotient_by_hand() {
    let m = manifold(&ManifoldSpec::cylinder(10));
    let ops = assemble(&m).unwrap();
    // h = 1/2 on r = 1 and -1/4 on r = 2; the boundary areas are 4 pi^2
    // and 8 pi^2, so int h vanishes and only the O(h^2) curvature error
    // of the flat metric remains
    let pi2 = std::f64::consts::PI.powi(2);
    let area = 4.0 * pi2 + 8.0 * pi2;
    assert!((ops.boundary_volume() - area).abs() < 1e-10);
    let hand = -2.0 * 2.0 * (0.5 * 4.0 * pi2 - 0.25 * 8.0 * pi2) / area;
    let q = rayleigh_quotient(&ops, &vec![1.0; m.len()], Problem::S0).unwrap();
    assert!((q - hand).abs() < 1e-5, "{q} vs {hand}");
    let hvals: Vec<f64> = ops.boundary_data.faces.iter().flat_map(|f| f.mean.clone()).collect();
    assert!(hvals.iter().all(|h| (h - 0.5).abs() < 1e-12 || (h + 0.25).abs() < 1e-12));
}

#[test]
fn closed_conformal_covariance() {
    let m = manifold(&ManifoldSpec::bump_torus(8, 0.2));
    let sol = solve_principal(&m, Problem::Closed, &opts()).unwrap();
    for c in [0.3, -0.5] {
        let s = vec![(2.0f64 * c).exp(); m.len()];
        let scaled = m.with_metric(m.metric().scaled(&s)).unwrap();
        let sc = solve_principal(&scaled, Problem::Closed, &opts()).unwrap();
        let expect = (-2.0 * c).exp() * sol.lambda;
        assert!((sc.lambda - expect).abs() < 1e-9 * expect.abs().max(1.0), "{} vs {expect}", sc.lambda);
    }
}

#[test]
fn bump_bounds_and_harnack() {
    let m = manifold(&ManifoldSpec::bump_slab(10, 0.2));
    let ops = assemble(&m).unwrap();
    for p in [Problem::S0, Problem::S1] {
        let sol = solve_principal_with(&m, &ops, p, &opts()).unwrap();
        let rep = eigen_bounds_check(&ops, &sol);
        println!("{p:?} lambda {} bound {} margin {}", rep.lambda, rep.bound, rep.margin);
        assert!(rep.passes && rep.margin >= 0.0);
        let h = harnack_stability(&m, &sol, 0.3, 0.01, &opts()).unwrap();
        println!("{h:?}");
        assert!(h.ratio > 0.0 && h.ratio <= 1.0);
        assert!(h.drift <= 0.1);
        assert!((h.perturbation_c2 - 0.01).abs() < 1e-12);
    }
    assert_eq!(harnack_ratio(&[1.0, 1.0, 1.0], &[0, 2]).unwrap(), 1.0);
}

#[test]
fn interior_operator_is_mass_self_adjoint() {
    let m = manifold(&ManifoldSpec::cylinder(7));
    let ops = assemble(&m).unwrap();
    assert_eq!(ops.interior.asymmetry(), 0.0);
    let _ = MetricField::<f64>::from_vec(3, vec![1.0; 9]);
}

#[test]
fn solver_is_deterministic() {
    let m = manifold(&ManifoldSpec::bump_slab(8, 0.2));
    let a = solve_principal(&m, Problem::S1, &opts()).unwrap();
    let b = solve_principal(&m, Problem::S1, &opts()).unwrap();
    assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    assert_eq!(a.u, b.u);
}
