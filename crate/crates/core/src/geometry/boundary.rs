//! Boundary faces: inward normal, induced metric, second fundamental form
//! and normalised mean curvature.

use super::connection::{christoffel, ConnectionField};
use super::fd;
use crate::error::Result;
use crate::grid::{Axis, BoundaryFace, DiscreteManifold, Lattice, MetricField};
use crate::linalg;
use crate::scalar::Real;

/// Geometry of one boundary face. Per-node arrays follow `nodes`.
#[derive(Clone, Debug)]
pub struct FaceGeometry<T> {
    pub face: BoundaryFace,
    pub nodes: Vec<usize>,
    /// Tangent coordinate axes (all axes except the face axis).
    pub tangent_axes: Vec<usize>,
    /// Inward `g`-unit normal, `n` components per node.
    pub normal: Vec<T>,
    /// Induced metric on the tangent axes, `(n-1)^2` per node.
    pub induced: Vec<T>,
    /// `A(X,Y) = g(nabla_X nu, Y)` on tangent axes, `(n-1)^2` per node.
    pub second_fundamental: Vec<T>,
    /// `h = tr A / (n-1)`.
    pub mean: Vec<T>,
    /// `sqrt(det induced)` times tangential trapezoid weights.
    pub area_weights: Vec<T>,
}

#[derive(Clone, Debug, Default)]
pub struct BoundaryData<T> {
    pub faces: Vec<FaceGeometry<T>>,
}

impl<T: Real> BoundaryData<T> {
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Total boundary area.
    pub fn area(&self) -> T {
        self.faces.iter().flat_map(|f| f.area_weights.iter().copied()).fold(T::zero(), |s, w| s + w)
    }

    pub fn sup_mean(&self) -> T {
        crate::scalar::sup_abs(self.faces.iter().flat_map(|f| f.mean.iter().copied()))
    }

    /// Largest `|g(nu,nu) - 1|` and `|g(nu, d_b)|` over all face nodes.
    pub fn normal_residuals(&self, m: &DiscreteManifold<T>) -> (T, T) {
        let n = m.dim();
        let (mut unit, mut orth) = (T::zero(), T::zero());
        for f in &self.faces {
            for (k, &v) in f.nodes.iter().enumerate() {
                let nu = &f.normal[k * n..(k + 1) * n];
                let g = m.metric().at(v);
                unit = unit.max((linalg::quad(g, n, nu) - T::one()).abs());
                for &b in &f.tangent_axes {
                    let mut s = T::zero();
                    for i in 0..n {
                        s = s + g[b * n + i] * nu[i];
                    }
                    orth = orth.max(s.abs());
                }
            }
        }
        (unit, orth)
    }
}

pub fn boundary_geometry<T: Real>(m: &DiscreteManifold<T>) -> Result<BoundaryData<T>> {
    if !m.has_boundary() {
        return Ok(BoundaryData::default());
    }
    let conn = christoffel(m)?;
    Ok(boundary_geometry_with(m, &conn))
}

pub fn boundary_geometry_with<T: Real>(m: &DiscreteManifold<T>, conn: &ConnectionField<T>) -> BoundaryData<T> {
    let n = m.dim();
    let lat = m.lattice();
    let nt = n - 1;
    let mut faces = Vec::new();
    for &face in m.faces() {
        let a = face.axis;
        let sigma: T = face.side.inward_sign();
        let tangent_axes: Vec<usize> = (0..n).filter(|&b| b != a).collect();
        let nodes = lat.face_nodes(face);
        let mut normal = Vec::with_capacity(nodes.len() * n);
        let mut induced = Vec::with_capacity(nodes.len() * nt * nt);
        let mut second = Vec::with_capacity(nodes.len() * nt * nt);
        let mut mean = Vec::with_capacity(nodes.len());
        let mut area = Vec::with_capacity(nodes.len());
        for &v in &nodes {
            let g = m.metric().at(v);
            let gi = conn.ginv_at(v);
            let root = gi[a * n + a].sqrt();
            for i in 0..n {
                normal.push(sigma * gi[i * n + a] / root);
            }
            let mut ind = vec![T::zero(); nt * nt];
            let mut sff = vec![T::zero(); nt * nt];
            for (p, &b) in tangent_axes.iter().enumerate() {
                for (q, &c) in tangent_axes.iter().enumerate() {
                    ind[p * nt + q] = g[b * n + c];
                    sff[p * nt + q] = -sigma * conn.get(v, a, b, c) / root;
                }
            }
            let ind_inv = linalg::sym_inverse(&ind, nt).expect("induced metric of an SPD metric is SPD");
            let mut tr = T::zero();
            for p in 0..nt {
                for q in 0..nt {
                    tr = tr + ind_inv[p * nt + q] * sff[p * nt + q];
                }
            }
            mean.push(tr / T::of(nt));
            area.push(linalg::determinant(&ind, nt).sqrt() * lat.face_weight(v, a));
            induced.extend(ind);
            second.extend(sff);
        }
        faces.push(FaceGeometry { face, nodes, tangent_axes, normal, induced, second_fundamental: second, mean, area_weights: area });
    }
    BoundaryData { faces }
}

/// `d_nu f = nu^i d_i f` on one face (one-sided along the face axis).
pub fn normal_derivative<T: Real>(m: &DiscreteManifold<T>, face: &FaceGeometry<T>, f: &[T]) -> Vec<T> {
    let n = m.dim();
    let df = fd::gradient(m.lattice(), f);
    face.nodes
        .iter()
        .enumerate()
        .map(|(k, &v)| (0..n).fold(T::zero(), |s, i| s + face.normal[k * n + i] * df[v * n + i]))
        .collect()
}

/// The face as an `(n-1)`-dimensional manifold with the induced metric.
/// Returns the manifold and, per face-manifold node, the original node.
pub fn face_manifold<T: Real>(m: &DiscreteManifold<T>, face: &FaceGeometry<T>) -> Result<(DiscreteManifold<T>, Vec<usize>)> {
    let lat = m.lattice();
    let nt = m.dim() - 1;
    let axes: Vec<Axis<T>> = face.tangent_axes.iter().map(|&b| lat.axis(b).clone()).collect();
    let flat = Lattice::new(axes);
    // face.nodes are ascending, which matches row-major order of the
    // remaining axes
    let metric = MetricField::from_vec(nt, face.induced.clone())?;
    let mut base = flat.len() / 2;
    let idx: Vec<usize> = flat.axes().iter().map(|a| a.nodes / 2).collect();
    if !flat.is_empty() {
        base = flat.node(&idx);
    }
    let fm = DiscreteManifold::new_any_dim(flat, metric, base)?;
    Ok((fm, face.nodes.clone()))
}
