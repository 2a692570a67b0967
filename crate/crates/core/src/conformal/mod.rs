//! Conformal changes `g[u] = e^{2u} g`, their curvature and connection
//! laws, and the flatzoomer functionals built on them.

mod flatzoomer;
mod quasi;

pub use flatzoomer::{
    compose_sqrt, compose_sum, flatzoomer_phi, flatzoomer_sweep, max_supported_k, FlatzoomerBound, FlatzoomerReport,
    FlatzoomerSweep,
};
pub use quasi::{convexity_radius_among, convexity_radius_estimate, quasi_flatzoomer_psi, ConvexityOptions, QuasiFlatzoomerData};

use crate::error::{Error, Result};
use crate::geometry::{christoffel, differential, fd, gradient_norm_sq, hessian, riemann_with, ConnectionField};
use crate::grid::{DiscreteManifold, MetricField, ScalarField, Slot, TensorField};
use crate::scalar::Real;

/// Log-factor `u` with `g[u] = e^{2u} g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalFactor<T> {
    pub log: ScalarField<T>,
}

impl<T: Real> ConformalFactor<T> {
    pub fn from_log(u: ScalarField<T>) -> Result<Self> {
        if let Some(v) = u.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { node: v });
        }
        Ok(Self { log: u })
    }

    pub fn constant(len: usize, c: T) -> Self {
        Self { log: ScalarField::constant(len, c) }
    }

    /// `u = (2/(n-2)) ln w`, so that `g[u] = w^{4/(n-2)} g`.
    pub fn from_positive(w: &[T], n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Dimension(n));
        }
        let k = T::lit(2.0) / T::of(n - 2);
        let mut u = Vec::with_capacity(w.len());
        for (v, &x) in w.iter().enumerate() {
            if !(x > T::zero()) || !x.is_finite() {
                return Err(Error::NonPositive { node: v, value: x.to_f() });
            }
            u.push(k * x.ln());
        }
        Ok(Self { log: ScalarField(u) })
    }

    /// Inverse of [`ConformalFactor::from_positive`].
    pub fn to_positive(&self, n: usize) -> ScalarField<T> {
        let k = T::of(n - 2) / T::lit(2.0);
        self.log.map(|u| (k * u).exp())
    }

    pub fn shifted(&self, c: T) -> Self {
        Self { log: self.log.map(|u| u + c) }
    }
}

/// The manifold with metric `e^{2u} g`; same chart and basepoint.
pub fn conformal_metric<T: Real>(m: &DiscreteManifold<T>, factor: &ConformalFactor<T>) -> Result<DiscreteManifold<T>> {
    if factor.log.len() != m.len() {
        return Err(Error::Shape(format!("factor has {} nodes, manifold {}", factor.log.len(), m.len())));
    }
    let two = T::lit(2.0);
    let mut scale = Vec::with_capacity(m.len());
    for (v, &u) in factor.log.iter().enumerate() {
        let s = (two * u).exp();
        if !s.is_finite() || !(s > T::zero()) {
            return Err(Error::NonFinite { node: v });
        }
        scale.push(s);
    }
    m.with_metric(m.metric().scaled(&scale))
}

/// Kulkarni-Nomizu product of two symmetric 2-tensors at one node:
/// `(h . k)_abcd = h_ac k_bd + h_bd k_ac - h_ad k_bc - h_bc k_ad`.
pub fn kulkarni_nomizu<T: Real>(h: &[T], k: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out[((a * n + b) * n + c) * n + d] = h[a * n + c] * k[b * n + d] + h[b * n + d] * k[a * n + c]
                        - h[a * n + d] * k[b * n + c]
                        - h[b * n + c] * k[a * n + d];
                }
            }
        }
    }
    out
}

/// Closed-form curvature of `g[u]`:
/// `e^{2u} (Riem_g - g . (Hess u - du du + |du|^2 g / 2))`.
pub fn conformal_riemann<T: Real>(m: &DiscreteManifold<T>, u: &[T]) -> Result<TensorField<T>> {
    if u.len() != m.len() {
        return Err(Error::Shape("factor length differs from node count".into()));
    }
    let n = m.dim();
    let conn = christoffel(m)?;
    let base = riemann_with(m, &conn);
    let hess = hessian(m, &conn, u);
    let du = fd::gradient(m.lattice(), u);
    let du2 = gradient_norm_sq(m, u)?;
    let n4 = n.pow(4);
    let mut data = vec![T::zero(); m.len() * n4];
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    for v in 0..m.len() {
        let g = m.metric().at(v);
        let mut t = vec![T::zero(); n * n];
        for a in 0..n {
            for b in 0..n {
                t[a * n + b] = hess.at(v)[a * n + b] - du[v * n + a] * du[v * n + b] + half * du2[v] * g[a * n + b];
            }
        }
        let kn = kulkarni_nomizu(g, &t, n);
        let e = (two * u[v]).exp();
        let r = base.riem.at(v);
        for i in 0..n4 {
            data[v * n4 + i] = e * (r[i] - kn[i]);
        }
    }
    Ok(TensorField { one_sided: m.lattice().has_boundary(), ..TensorField::covariant(n, 4, data) })
}

/// `nabla_v X` for the connection `conn`, vector fields given as
/// contravariant rank-1 tensors.
pub fn covariant_along<T: Real>(
    m: &DiscreteManifold<T>,
    conn: &ConnectionField<T>,
    v: &TensorField<T>,
    x: &TensorField<T>,
) -> Result<TensorField<T>> {
    let n = m.dim();
    check_vector(v, m)?;
    check_vector(x, m)?;
    let dx: Vec<Vec<T>> = (0..n).map(|a| fd::partial(m.lattice(), &x.data, n, a)).collect();
    let mut out = vec![T::zero(); m.len() * n];
    for node in 0..m.len() {
        let vv = v.at(node);
        let xx = x.at(node);
        for c in 0..n {
            let mut s = T::zero();
            for a in 0..n {
                let mut t = dx[a][node * n + c];
                for b in 0..n {
                    t = t + conn.get(node, c, a, b) * xx[b];
                }
                s = s + vv[a] * t;
            }
            out[node * n + c] = s;
        }
    }
    Ok(TensorField { dim: n, slots: vec![Slot::Contra], data: out, one_sided: m.lattice().has_boundary() })
}

fn check_vector<T: Real>(t: &TensorField<T>, m: &DiscreteManifold<T>) -> Result<()> {
    if t.slots != [Slot::Contra] {
        return Err(Error::Shape("expected a vector field (one contravariant slot)".into()));
    }
    t.check_shape(m.len())
}

/// `nabla^{g[u]}_v X = nabla^g_v X + du(X) v + du(v) X - g(v,X) grad_g u`.
pub fn conformal_connection<T: Real>(
    m: &DiscreteManifold<T>,
    u: &[T],
    v: &TensorField<T>,
    x: &TensorField<T>,
) -> Result<TensorField<T>> {
    let n = m.dim();
    let conn = christoffel(m)?;
    let mut out = covariant_along(m, &conn, v, x)?;
    let du = differential(m, u);
    for node in 0..m.len() {
        let g = m.metric().at(node);
        let gi = conn.ginv_at(node);
        let d = du.at(node);
        let vv = v.at(node);
        let xx = x.at(node);
        let dux = (0..n).fold(T::zero(), |s, i| s + d[i] * xx[i]);
        let duv = (0..n).fold(T::zero(), |s, i| s + d[i] * vv[i]);
        let mut gvx = T::zero();
        for i in 0..n {
            for j in 0..n {
                gvx = gvx + g[i * n + j] * vv[i] * xx[j];
            }
        }
        let o = out.at_mut(node);
        for c in 0..n {
            let grad = (0..n).fold(T::zero(), |s, mm| s + gi[c * n + mm] * d[mm]);
            o[c] = o[c] + dux * vv[c] + duv * xx[c] - gvx * grad;
        }
    }
    Ok(out)
}

/// Builds a vector field from per-node components.
pub fn vector_field<T: Real>(m: &DiscreteManifold<T>, f: impl Fn(&[T]) -> Vec<T>) -> TensorField<T> {
    let n = m.dim();
    let mut data = Vec::with_capacity(m.len() * n);
    for v in 0..m.len() {
        data.extend(f(&m.lattice().coords(v)));
    }
    TensorField { dim: n, slots: vec![Slot::Contra], data, one_sided: false }
}

/// Metric of `e^{2u} g` as a plain field (no manifold validation).
pub fn scaled_metric<T: Real>(g: &MetricField<T>, u: &[T]) -> MetricField<T> {
    let two = T::lit(2.0);
    let s: Vec<T> = u.iter().map(|x| (two * *x).exp()).collect();
    g.scaled(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::riemann;
    use crate::grid::{build_box_manifold, ManifoldSpec};

    #[test]
    fn factor_roundtrip() {
        let w: Vec<f64> = (1..50).map(|i| 0.3 + i as f64 * 0.07).collect();
        let f = ConformalFactor::from_positive(&w, 3).unwrap();
        let back = f.to_positive(3);
        for (a, b) in w.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12 * a.abs());
        }
        assert!(ConformalFactor::from_positive(&[1.0, 0.0], 3).is_err());
    }

    #[test]
    fn zero_factor_is_identity() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::bump_slab(6, 0.1)).unwrap();
        let c = conformal_metric(&m, &ConformalFactor::constant(m.len(), 0.0)).unwrap();
        assert_eq!(c.metric(), m.metric());
    }

    #[test]
    fn constant_factor_stays_flat() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::flat_torus(6)).unwrap();
        let u = vec![0.7; m.len()];
        let r = conformal_riemann(&m, &u).unwrap();
        assert_eq!(crate::scalar::sup_abs(r.data.iter().copied()), 0.0);
        let c = conformal_metric(&m, &ConformalFactor::constant(m.len(), 0.7)).unwrap();
        assert_eq!(riemann(&c).unwrap().scalar.sup_abs(), 0.0);
    }

    #[test]
    fn kn_of_metric_is_constant_curvature() {
        // (g . g)/2 has sectional curvature 1 in the Besse convention
        let g = crate::linalg::identity::<f64>(3);
        let kn = kulkarni_nomizu(&g, &g, 3);
        assert_eq!(kn[((0 * 3 + 1) * 3 + 0) * 3 + 1] / 2.0, 1.0);
    }
}
