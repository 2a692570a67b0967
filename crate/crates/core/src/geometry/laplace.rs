//! Divergence-form Laplace-Beltrami discretisation.
//!
//! The Dirichlet energy `int |grad f|^2 dV` is assembled edge by edge
//! (diagonal metric coefficients, midpoint averaged) and plaquette by
//! plaquette (off-diagonal coefficients). The resulting stiffness matrix
//! `K` is symmetric by construction and `-M^{-1} K` approximates the
//! Laplacian at interior nodes, with `M` the volume weights.

use super::connection::{christoffel, inverse_metric};
use super::fd;
use crate::error::Result;
use crate::grid::{DiscreteManifold, ScalarField};
use crate::linalg;
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Clone, Debug)]
pub struct DirichletForm<T> {
    /// `f^T K f ~ int |grad f|^2 dV`.
    pub stiffness: CsrMatrix<T>,
    /// `sqrt(det g)` times trapezoid weights.
    pub mass: Vec<T>,
}

fn transverse_weight<T: Real>(m: &DiscreteManifold<T>, v: usize, skip: &[usize]) -> T {
    let lat = m.lattice();
    let mut w = T::one();
    for a in 0..lat.dim() {
        if skip.contains(&a) {
            continue;
        }
        w = w * lat.axis(a).h;
        if lat.end(v, a).is_some() {
            w = w * T::lit(0.5);
        }
    }
    w
}

pub fn dirichlet_form<T: Real>(m: &DiscreteManifold<T>) -> Result<DirichletForm<T>> {
    let n = m.dim();
    let lat = m.lattice();
    let ginv = inverse_metric(m)?;
    let sq: Vec<T> = (0..m.len()).map(|v| linalg::determinant(m.metric().at(v), n).sqrt()).collect();
    let w = |v: usize, a: usize, b: usize| sq[v] * ginv[v * n * n + a * n + b];
    let mut k = TripletBuilder::with_capacity(m.len(), m.len() * (4 * n + 1));
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    for a in 0..n {
        let h = lat.axis(a).h;
        for v in 0..m.len() {
            let Some(u) = lat.shift(v, a, 1) else { continue };
            if u == v {
                continue;
            }
            let c = transverse_weight(m, v, &[a]) * (w(v, a, a) + w(u, a, a)) * half / h;
            k.add(v, v, c);
            k.add(u, u, c);
            k.add(v, u, -c);
            k.add(u, v, -c);
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            let (ha, hb) = (lat.axis(a).h, lat.axis(b).h);
            for v in 0..m.len() {
                let Some(va) = lat.shift(v, a, 1) else { continue };
                let Some(vb) = lat.shift(v, b, 1) else { continue };
                let vab = lat.shift(va, b, 1).expect("plaquette corner");
                let corners = [v, va, vb, vab];
                let ws: Vec<T> = corners.iter().map(|&c| w(c, a, b)).collect();
                if ws.iter().all(|x| *x == T::zero()) {
                    continue;
                }
                let wbar = (ws[0] + ws[1] + ws[2] + ws[3]) * quarter;
                let omega = transverse_weight(m, v, &[a, b]) * ha * hb;
                let p = [-T::one(), T::one(), -T::one(), T::one()].map(|x| x / (ha + ha));
                let q = [-T::one(), -T::one(), T::one(), T::one()].map(|x| x / (hb + hb));
                for i in 0..4 {
                    for j in 0..4 {
                        k.add(corners[i], corners[j], wbar * omega * (p[i] * q[j] + q[i] * p[j]));
                    }
                }
            }
        }
    }
    let mass = (0..m.len()).map(|v| sq[v] * lat.node_weight(v)).collect();
    Ok(DirichletForm { stiffness: k.build(), mass })
}

/// Strong-form `g^{ij}(d_i d_j f - Gamma^k_ij d_k f)` at every node.
pub fn laplace_beltrami_strong<T: Real>(m: &DiscreteManifold<T>, f: &[T]) -> Result<ScalarField<T>> {
    let n = m.dim();
    let conn = christoffel(m)?;
    let dd = fd::coordinate_hessian(m.lattice(), f);
    let df = fd::gradient(m.lattice(), f);
    let vals = (0..m.len())
        .map(|v| {
            let gi = conn.ginv_at(v);
            let mut s = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let mut t = dd[v * n * n + i * n + j];
                    for k in 0..n {
                        t = t - conn.get(v, k, i, j) * df[v * n + k];
                    }
                    s = s + gi[i * n + j] * t;
                }
            }
            s
        })
        .collect();
    Ok(ScalarField(vals))
}

/// `Delta_g f`: divergence form `-(K f)/M` at interior nodes, strong form on
/// the boundary.
pub fn laplace_beltrami<T: Real>(m: &DiscreteManifold<T>, f: &[T]) -> Result<ScalarField<T>> {
    let form = dirichlet_form(m)?;
    let kf = form.stiffness.matvec(f);
    let strong = if m.has_boundary() { Some(laplace_beltrami_strong(m, f)?) } else { None };
    let vals = (0..m.len())
        .map(|v| match &strong {
            Some(s) if m.lattice().is_boundary(v) => s[v],
            _ => -kf[v] / form.mass[v],
        })
        .collect();
    Ok(ScalarField(vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_box_manifold, ManifoldSpec};

    #[test]
    fn constants_are_harmonic() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::bump_slab(8, 0.1)).unwrap();
        let lap = laplace_beltrami(&m, &vec![3.0; m.len()]).unwrap();
        assert!(lap.sup_abs() < 1e-11);
    }

    #[test]
    fn stiffness_is_symmetric() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::cylinder(7)).unwrap();
        let f = dirichlet_form(&m).unwrap();
        assert_eq!(f.stiffness.asymmetry(), 0.0);
    }
}
