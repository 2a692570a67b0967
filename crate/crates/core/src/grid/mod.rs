//! Box-chart lattices, metric fields and pointed discrete manifolds.

mod formula;
mod graph;
mod io;

pub use formula::{build_box_manifold, AxisSpec, ManifoldSpec, MetricFormula};
pub use graph::{
    distances_from, distances_from_set, graph_distance, metric_ball, shortest_path_tree, GraphFilter,
    ShortestPathTree,
};
pub(crate) use graph::{max_edge_length, winding_loop};
pub use io::{write_fields_csv, write_table_csv, fmt_num};

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Minimum node count per axis (two-layer one-sided stencils need four).
pub const MIN_NODES: usize = 5;

/// One coordinate axis of a box chart. Node `i` sits at
/// `origin + (offset + i) * h`; keeping the offset integral makes
/// extension and cutting exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis<T> {
    pub origin: T,
    pub h: T,
    pub offset: isize,
    pub nodes: usize,
    pub periodic: bool,
}

impl<T: Real> Axis<T> {
    /// Closed interval `[lo, hi]` with both ends on the lattice.
    pub fn interval(lo: T, hi: T, nodes: usize) -> Self {
        let h = (hi - lo) / T::of(nodes.max(2) - 1);
        Self { origin: lo, h, offset: 0, nodes, periodic: false }
    }

    /// Periodic axis `[lo, hi)`; `hi` is identified with `lo`.
    pub fn periodic(lo: T, hi: T, nodes: usize) -> Self {
        let h = (hi - lo) / T::of(nodes.max(1));
        Self { origin: lo, h, offset: 0, nodes, periodic: true }
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        self.origin + T::from_isize(self.offset + i as isize).unwrap() * self.h
    }

    pub fn lo(&self) -> T {
        self.coord(0)
    }

    /// Last node coordinate (interval) or the identified endpoint (periodic).
    pub fn hi(&self) -> T {
        if self.periodic {
            self.coord(self.nodes)
        } else {
            self.coord(self.nodes - 1)
        }
    }

    pub fn length(&self) -> T {
        self.hi() - self.lo()
    }

    /// Number of lattice steps spanning the chart along this axis.
    pub fn steps(&self) -> usize {
        if self.periodic {
            self.nodes
        } else {
            self.nodes - 1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Lo,
    Hi,
}

impl Side {
    /// +1 for the low face (inward normal points along +axis), -1 for high.
    pub fn inward_sign<T: Real>(self) -> T {
        match self {
            Side::Lo => T::one(),
            Side::Hi => -T::one(),
        }
    }
}

/// A boundary face: one end of a non-periodic axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundaryFace {
    pub axis: usize,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice<T> {
    axes: Vec<Axis<T>>,
    strides: Vec<usize>,
    len: usize,
}

impl<T: Real> Lattice<T> {
    pub fn new(axes: Vec<Axis<T>>) -> Self {
        let n = axes.len();
        let mut strides = vec![1usize; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].nodes;
        }
        let len = axes.iter().map(|a| a.nodes).product();
        Self { axes, strides, len }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis<T> {
        &self.axes[a]
    }

    #[inline]
    pub fn stride(&self, a: usize) -> usize {
        self.strides[a]
    }

    #[inline]
    pub fn index_along(&self, node: usize, a: usize) -> usize {
        (node / self.strides[a]) % self.axes[a].nodes
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| self.index_along(node, a)).collect()
    }

    pub fn node(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<T> {
        (0..self.dim()).map(|a| self.axes[a].coord(self.index_along(node, a))).collect()
    }

    /// Neighbor `delta` steps along axis `a`, wrapping on periodic axes.
    #[inline]
    pub fn shift(&self, node: usize, a: usize, delta: isize) -> Option<usize> {
        let ax = &self.axes[a];
        let i = self.index_along(node, a) as isize;
        let j = i + delta;
        let n = ax.nodes as isize;
        let j = if ax.periodic {
            j.rem_euclid(n)
        } else if j < 0 || j >= n {
            return None;
        } else {
            j
        };
        Some((node as isize + (j - i) * self.strides[a] as isize) as usize)
    }

    /// Which end of a non-periodic axis the node sits on, if any.
    #[inline]
    pub fn end(&self, node: usize, a: usize) -> Option<Side> {
        let ax = &self.axes[a];
        if ax.periodic {
            return None;
        }
        let i = self.index_along(node, a);
        if i == 0 {
            Some(Side::Lo)
        } else if i + 1 == ax.nodes {
            Some(Side::Hi)
        } else {
            None
        }
    }

    pub fn faces(&self) -> Vec<BoundaryFace> {
        let mut f = Vec::new();
        for (a, ax) in self.axes.iter().enumerate() {
            if !ax.periodic {
                f.push(BoundaryFace { axis: a, side: Side::Lo });
                f.push(BoundaryFace { axis: a, side: Side::Hi });
            }
        }
        f
    }

    /// Nodes on a face, ascending.
    pub fn face_nodes(&self, face: BoundaryFace) -> Vec<usize> {
        (0..self.len).filter(|&v| self.end(v, face.axis) == Some(face.side)).collect()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        (0..self.dim()).any(|a| self.end(node, a).is_some())
    }

    /// Trapezoid quadrature weight of a node (cell volume share).
    pub fn node_weight(&self, node: usize) -> T {
        let mut w = T::one();
        for a in 0..self.dim() {
            w = w * self.axes[a].h;
            if self.end(node, a).is_some() {
                w = w * T::lit(0.5);
            }
        }
        w
    }

    /// Trapezoid weight of a node within a face (axis `skip` omitted).
    pub fn face_weight(&self, node: usize, skip: usize) -> T {
        let mut w = T::one();
        for a in 0..self.dim() {
            if a == skip {
                continue;
            }
            w = w * self.axes[a].h;
            if self.end(node, a).is_some() {
                w = w * T::lit(0.5);
            }
        }
        w
    }

    /// Node nearest to a coordinate point (periodic axes wrap).
    pub fn nearest_node(&self, x: &[T]) -> usize {
        let mut idx = Vec::with_capacity(self.dim());
        for (a, ax) in self.axes.iter().enumerate() {
            let t = ((x[a] - ax.lo()) / ax.h).round();
            let n = ax.nodes as isize;
            let i = t.to_isize().unwrap_or(0);
            let i = if ax.periodic { i.rem_euclid(n) } else { i.clamp(0, n - 1) };
            idx.push(i as usize);
        }
        self.node(&idx)
    }

    /// Whether `x` lies in the chart (within `slack` cells on interval axes).
    pub fn contains(&self, x: &[T], slack: T) -> bool {
        self.axes.iter().enumerate().all(|(a, ax)| {
            let t = (x[a] - ax.lo()) / ax.h;
            t.is_finite() && (ax.periodic || (t >= -slack && t <= T::of(ax.nodes - 1) + slack))
        })
    }

    /// Multilinear interpolation of a node-major field with `ncomp`
    /// components; `None` outside interval axes (beyond `slack` cells).
    pub fn interpolate(&self, data: &[T], ncomp: usize, x: &[T], slack: T) -> Option<Vec<T>> {
        let d = self.dim();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for (a, ax) in self.axes.iter().enumerate() {
            let t = (x[a] - ax.lo()) / ax.h;
            if !t.is_finite() {
                return None;
            }
            let n = ax.nodes as isize;
            let f = t.floor();
            let mut i = f.to_isize()?;
            let mut r = t - f;
            if ax.periodic {
                i = i.rem_euclid(n);
            } else {
                let top = T::of(ax.nodes - 1);
                if t < -slack || t > top + slack {
                    return None;
                }
                if i < 0 {
                    i = 0;
                    r = T::zero();
                } else if i >= n - 1 {
                    i = n - 2;
                    r = T::one();
                }
            }
            base.push(i as usize);
            frac.push(r);
        }
        let mut out = vec![T::zero(); ncomp];
        let mut idx = vec![0usize; d];
        for corner in 0..(1usize << d) {
            let mut w = T::one();
            for a in 0..d {
                let bit = (corner >> a) & 1;
                let ax = &self.axes[a];
                let mut i = base[a] + bit;
                if ax.periodic && i == ax.nodes {
                    i = 0;
                }
                idx[a] = i;
                w = w * if bit == 1 { frac[a] } else { T::one() - frac[a] };
            }
            if w == T::zero() {
                continue;
            }
            let v = self.node(&idx);
            for c in 0..ncomp {
                out[c] = out[c] + w * data[v * ncomp + c];
            }
        }
        Some(out)
    }

    pub fn min_spacing(&self) -> T {
        self.axes.iter().map(|a| a.h).fold(T::infinity(), |m, h| m.min(h))
    }

    pub fn max_spacing(&self) -> T {
        self.axes.iter().map(|a| a.h).fold(T::zero(), |m, h| m.max(h))
    }

    pub fn has_boundary(&self) -> bool {
        self.axes.iter().any(|a| !a.periodic)
    }
}

/// Per-node symmetric `n x n` coordinate components `g_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> MetricField<T> {
    pub fn from_vec(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() % (dim * dim) != 0 {
            return Err(Error::Shape(format!("metric data length {} not a multiple of {}", data.len(), dim * dim)));
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(lattice: &Lattice<T>, f: impl Fn(&[T]) -> Vec<T>) -> Self {
        let n = lattice.dim();
        let mut data = Vec::with_capacity(lattice.len() * n * n);
        for v in 0..lattice.len() {
            let g = f(&lattice.coords(v));
            debug_assert_eq!(g.len(), n * n);
            data.extend_from_slice(&g);
        }
        Self { dim: n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.dim * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn at(&self, node: usize) -> &[T] {
        let s = self.dim * self.dim;
        &self.data[node * s..(node + 1) * s]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [T] {
        let s = self.dim * self.dim;
        &mut self.data[node * s..(node + 1) * s]
    }

    pub fn raw(&self) -> &[T] {
        &self.data
    }

    /// Pointwise scalar multiple `phi * g`.
    pub fn scaled(&self, phi: &[T]) -> Self {
        let s = self.dim * self.dim;
        let data = self.data.chunks(s).zip(phi).flat_map(|(g, p)| g.iter().map(move |x| *x * *p)).collect();
        Self { dim: self.dim, data }
    }

    /// Smallest eigenvalue over all nodes.
    pub fn min_eigenvalue(&self) -> T {
        (0..self.len())
            .map(|v| linalg::min_eigenvalue(self.at(v), self.dim).unwrap_or(T::nan()))
            .fold(T::infinity(), |m, x| if x.is_nan() || m.is_nan() { T::nan() } else { m.min(x) })
    }
}

/// Scalar values at lattice nodes.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScalarField<T>(pub Vec<T>);

impl<T: Real> ScalarField<T> {
    pub fn constant(len: usize, c: T) -> Self {
        Self(vec![c; len])
    }

    pub fn from_fn(lattice: &Lattice<T>, f: impl Fn(&[T]) -> T) -> Self {
        Self((0..lattice.len()).map(|v| f(&lattice.coords(v))).collect())
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self(self.0.iter().map(|x| f(*x)).collect())
    }

    pub fn sup_abs(&self) -> T {
        crate::scalar::sup_abs(self.0.iter().copied())
    }
}

impl<T> Deref for ScalarField<T> {
    type Target = Vec<T>;
    fn deref(&self) -> &Vec<T> {
        &self.0
    }
}

impl<T> DerefMut for ScalarField<T> {
    fn deref_mut(&mut self) -> &mut Vec<T> {
        &mut self.0
    }
}

/// Variance of one tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Co,
    Contra,
}

/// Rank-r coordinate tensor sampled at nodes; components are stored
/// node-major, then slot-major with the last slot fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField<T> {
    pub dim: usize,
    pub slots: Vec<Slot>,
    pub data: Vec<T>,
    /// Set when one-sided boundary stencils entered the computation.
    pub one_sided: bool,
}

impl<T: Real> TensorField<T> {
    pub fn zeros(dim: usize, slots: Vec<Slot>, nodes: usize) -> Self {
        let c = dim.pow(slots.len() as u32);
        Self { dim, slots, data: vec![T::zero(); nodes * c], one_sided: false }
    }

    pub fn covariant(dim: usize, rank: usize, data: Vec<T>) -> Self {
        Self { dim, slots: vec![Slot::Co; rank], data, one_sided: false }
    }

    pub fn from_scalar(f: &ScalarField<T>, dim: usize) -> Self {
        Self { dim, slots: Vec::new(), data: f.0.clone(), one_sided: false }
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn comps(&self) -> usize {
        self.dim.pow(self.slots.len() as u32)
    }

    pub fn nodes(&self) -> usize {
        self.data.len() / self.comps()
    }

    #[inline]
    pub fn at(&self, node: usize) -> &[T] {
        let c = self.comps();
        &self.data[node * c..(node + 1) * c]
    }

    #[inline]
    pub fn at_mut(&mut self, node: usize) -> &mut [T] {
        let c = self.comps();
        &mut self.data[node * c..(node + 1) * c]
    }

    pub fn check_shape(&self, nodes: usize) -> Result<()> {
        if self.data.len() != nodes * self.comps() {
            return Err(Error::Shape(format!(
                "tensor of rank {} has {} values, expected {}",
                self.rank(),
                self.data.len(),
                nodes * self.comps()
            )));
        }
        Ok(())
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect();
        Self { dim: self.dim, slots: self.slots.clone(), data, one_sided: self.one_sided || other.one_sided }
    }
}

/// Pointed compact Riemannian manifold on a single box chart. Boundary
/// faces are the ends of the non-periodic axes.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteManifold<T> {
    lattice: Lattice<T>,
    metric: MetricField<T>,
    faces: Vec<BoundaryFace>,
    boundary_nodes: Vec<usize>,
    basepoint: usize,
}

impl<T: Real> DiscreteManifold<T> {
    /// Validates dimension, node counts, metric symmetry/positivity and the
    /// basepoint.
    pub fn new(lattice: Lattice<T>, metric: MetricField<T>, basepoint: usize) -> Result<Self> {
        if lattice.dim() < 3 {
            return Err(Error::Dimension(lattice.dim()));
        }
        Self::new_any_dim(lattice, metric, basepoint)
    }

    /// Same checks as [`DiscreteManifold::new`] without the `n >= 3`
    /// restriction; used for boundary faces and low-dimensional tests.
    pub fn new_any_dim(lattice: Lattice<T>, metric: MetricField<T>, basepoint: usize) -> Result<Self> {
        let n = lattice.dim();
        if n == 0 {
            return Err(Error::Dimension(0));
        }
        for (a, ax) in lattice.axes().iter().enumerate() {
            if ax.nodes < MIN_NODES {
                return Err(Error::TooFewNodes { axis: a, nodes: ax.nodes, min: MIN_NODES });
            }
            if !(ax.h > T::zero()) || !ax.h.is_finite() {
                return Err(Error::InvalidRange { axis: a, lo: ax.lo().to_f(), hi: ax.hi().to_f() });
            }
        }
        if metric.dim() != n || metric.len() != lattice.len() {
            return Err(Error::Shape(format!(
                "metric has {} nodes of dimension {}, lattice has {} nodes of dimension {}",
                metric.len(),
                metric.dim(),
                lattice.len(),
                n
            )));
        }
        for v in 0..lattice.len() {
            let g = metric.at(v);
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { node: v });
            }
            for i in 0..n {
                for j in i + 1..n {
                    if g[i * n + j] != g[j * n + i] {
                        return Err(Error::NotSymmetric { node: v });
                    }
                }
            }
            if linalg::cholesky(g, n).is_none() {
                return Err(Error::NotPositiveDefinite {
                    node: v,
                    coords: lattice.coords(v).iter().map(|x| x.to_f()).collect(),
                });
            }
        }
        if basepoint >= lattice.len() {
            return Err(Error::Basepoint(format!("node {basepoint} out of range")));
        }
        if lattice.is_boundary(basepoint) {
            return Err(Error::Basepoint(format!("node {basepoint} lies on the boundary")));
        }
        let faces = lattice.faces();
        let boundary_nodes = (0..lattice.len()).filter(|&v| lattice.is_boundary(v)).collect();
        Ok(Self { lattice, metric, faces, boundary_nodes, basepoint })
    }

    /// Same chart and basepoint, new metric.
    pub fn with_metric(&self, metric: MetricField<T>) -> Result<Self> {
        Self::new_any_dim(self.lattice.clone(), metric, self.basepoint)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    #[inline]
    pub fn metric(&self) -> &MetricField<T> {
        &self.metric
    }

    pub fn faces(&self) -> &[BoundaryFace] {
        &self.faces
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn has_boundary(&self) -> bool {
        !self.faces.is_empty()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn with_basepoint(&self, basepoint: usize) -> Result<Self> {
        Self::new_any_dim(self.lattice.clone(), self.metric.clone(), basepoint)
    }

    /// Riemannian volume weights `sqrt(det g) * trapezoid weight`.
    pub fn volume_weights(&self) -> Vec<T> {
        let n = self.dim();
        (0..self.len())
            .map(|v| linalg::determinant(self.metric.at(v), n).sqrt() * self.lattice.node_weight(v))
            .collect()
    }

    pub fn volume(&self) -> T {
        self.volume_weights().into_iter().fold(T::zero(), |s, w| s + w)
    }
}
