use satlab::grid::{build_box_manifold, DiscreteManifold, ManifoldSpec};
use satlab::satellite::*;
use satlab::spectral::{Problem, SolverOptions};

fn manifold(spec: &ManifoldSpec) -> DiscreteManifold<f64> {
    build_box_manifold(spec).unwrap()
}

#[test]
fn flat_slab_satellites_are_trivial() {
    let m = manifold(&ManifoldSpec::flat_slab(8));
    for p in [Problem::S0, Problem::S1] {
        let s = make_satellite(&m, p, &SolverOptions::default()).unwrap();
        let r = verify_identities(&s);
        println!("{p:?}: {r:?}");
        assert!(r.scalar_residual < 1e-9);
        assert!(r.mean_residual.unwrap() < 1e-9);
        assert_eq!(s.eigen.u[m.basepoint()], 1.0);
    }
}

#[test]
fn bump_identities_converge() {
    for p in [Problem::S0, Problem::S1] {
        let c = identity_convergence::<f64>(&ManifoldSpec::bump_slab(8, 0.2), p, &SolverOptions::default()).unwrap();
        println!(
            "{p:?}: R {:e} -> {:e} (order {:?}), h {:?} -> {:?} (order {:?})",
            c.coarse.scalar_residual, c.fine.scalar_residual, c.scalar_order, c.coarse.mean_residual, c.fine.mean_residual, c.mean_order
        );
        assert!(c.passes);
    }
}

#[test]
fn closed_bump_identity_and_sign_law() {
    let c = identity_convergence::<f64>(&ManifoldSpec::bump_torus(8, 0.2), Problem::Closed, &SolverOptions::default()).unwrap();
    println!("closed: {:?} order {:?}", c.fine, c.scalar_order);
    assert!(c.passes);
}

#[test]
fn bounded_geometry_flat_torus() {
    let m = manifold(&ManifoldSpec::flat_torus(12));
    let r = bounded_geometry_report(&m, 4.0, 2).unwrap();
    println!("{}", r.table());
    assert!(r.passes(), "{:?}", r.failing());
}

#[test]
fn bounded_geometry_mid_slab_equality() {
    let m = manifold(&ManifoldSpec::flat_slab(9));
    let r = bounded_geometry_report(&m, 4.0, 1).unwrap();
    println!("{}", r.table());
    let b = r.get("basepoint-distance").unwrap();
    assert_eq!(b.measured, 0.5);
    assert!(b.passes);
    assert!(r.get("collar-injectivity").unwrap().passes);
}

#[test]
fn bounded_geometry_names_curvature_failure() {
    let m = manifold(&ManifoldSpec::bump_torus(12, 0.5));
    let r = bounded_geometry_report(&m, 100.0, 2).unwrap();
    println!("{}", r.table());
    let failing: Vec<&str> = r.failing().iter().map(|v| v.item.as_str()).collect();
    assert!(failing.iter().any(|f| f.starts_with("curvature-l")), "{failing:?}");
}

#[test]
fn collar_fails_when_flows_meet() {
    // collars of length 0.6 from both faces of a unit slab must overlap
    let m = manifold(&ManifoldSpec::flat_slab(9));
    let r = bounded_geometry_report(&m, 1.0 / 0.6, 0).unwrap();
    assert!(!r.get("collar-injectivity").unwrap().passes);
}

#[test]
fn scalar_flat_sign_law_reads_the_boundary() {
    let m = manifold(&ManifoldSpec::cylinder(9));
    let s = make_satellite(&m, Problem::S0, &SolverOptions::default()).unwrap();
    let r = verify_identities(&s);
    // R~ vanishes up to the residual, so only the boundary carries a sign
    assert!(s.eigen.lambda.abs() > r.mean_residual.unwrap());
    assert_eq!(r.sign_law, Some(true));
    let opposite = s.boundary.faces.iter().flat_map(|f| f.mean.iter()).all(|h| h * s.eigen.lambda < 0.0);
    assert!(opposite);
}
