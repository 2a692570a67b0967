//! Manifold specifications and the bundled metric formulas.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Axis, DiscreteManifold, Lattice, MetricField};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    #[serde(default)]
    pub periodic: bool,
}

/// Box-chart manifold description, as read from scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub dim: usize,
    pub axes: Vec<AxisSpec>,
    #[serde(default = "default_metric")]
    pub metric: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Basepoint coordinates; the nearest node is used. Defaults to the
    /// central node.
    #[serde(default)]
    pub basepoint: Option<Vec<f64>>,
}

fn default_metric() -> String {
    "flat".into()
}

impl ManifoldSpec {
    fn cube(dim: usize, nodes: usize, periodic: &[bool], metric: &str) -> Self {
        Self {
            dim,
            axes: periodic.iter().map(|&p| AxisSpec { lo: 0.0, hi: 1.0, nodes, periodic: p }).collect(),
            metric: metric.into(),
            params: BTreeMap::new(),
            basepoint: None,
        }
    }

    /// Flat unit 3-torus.
    pub fn flat_torus(nodes: usize) -> Self {
        Self::cube(3, nodes, &[true, true, true], "flat")
    }

    /// Flat `T^2 x [0,1]`.
    pub fn flat_slab(nodes: usize) -> Self {
        Self::cube(3, nodes, &[true, true, false], "flat")
    }

    /// Conformal bump metric on `T^2 x [0,1]`.
    pub fn bump_slab(nodes: usize, amplitude: f64) -> Self {
        let mut s = Self::cube(3, nodes, &[true, true, false], "conformal-bump");
        s.params.insert("amplitude".into(), amplitude);
        s
    }

    /// Conformal bump metric on the unit 3-torus.
    pub fn bump_torus(nodes: usize, amplitude: f64) -> Self {
        let mut s = Self::cube(3, nodes, &[true, true, true], "conformal-bump");
        s.params.insert("amplitude".into(), amplitude);
        s
    }

    /// Cylindrical chart `(r, theta, z) in [1,2] x [0,2pi) x [0,2pi)`.
    pub fn cylinder(nodes: usize) -> Self {
        let tau = std::f64::consts::TAU;
        Self {
            dim: 3,
            axes: vec![
                AxisSpec { lo: 1.0, hi: 2.0, nodes, periodic: false },
                AxisSpec { lo: 0.0, hi: tau, nodes, periodic: true },
                AxisSpec { lo: 0.0, hi: tau, nodes, periodic: true },
            ],
            metric: "diag-cylinder".into(),
            params: BTreeMap::new(),
            basepoint: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    /// Same spec with every axis set to `nodes` nodes.
    pub fn with_resolution(mut self, nodes: usize) -> Self {
        for a in &mut self.axes {
            a.nodes = nodes;
        }
        self
    }

    /// Same domain with every grid spacing halved.
    pub fn refined(mut self) -> Self {
        for a in &mut self.axes {
            a.nodes = if a.periodic { 2 * a.nodes } else { 2 * a.nodes - 1 };
        }
        self
    }

    pub fn formula(&self) -> Result<MetricFormula> {
        MetricFormula::parse(&self.metric, &self.params, &self.axes)
    }

    pub fn lattice<T: Real>(&self) -> Result<Lattice<T>> {
        if self.dim != self.axes.len() {
            return Err(Error::Shape(format!("dim = {} but {} axes given", self.dim, self.axes.len())));
        }
        let mut axes = Vec::with_capacity(self.dim);
        for (a, s) in self.axes.iter().enumerate() {
            if !(s.hi > s.lo) || !s.lo.is_finite() || !s.hi.is_finite() {
                return Err(Error::InvalidRange { axis: a, lo: s.lo, hi: s.hi });
            }
            if s.nodes < super::MIN_NODES {
                return Err(Error::TooFewNodes { axis: a, nodes: s.nodes, min: super::MIN_NODES });
            }
            let (lo, hi) = (T::lit(s.lo), T::lit(s.hi));
            axes.push(if s.periodic { Axis::periodic(lo, hi, s.nodes) } else { Axis::interval(lo, hi, s.nodes) });
        }
        Ok(Lattice::new(axes))
    }
}

/// Closed-form metric families addressable by id.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricFormula {
    /// `g = scale * identity`.
    Flat { scale: f64 },
    /// `g = diag(1, x_0^2, 1, ...)`: polar coordinates in the first two axes.
    DiagCylinder,
    /// `g = exp(2 w) identity` with
    /// `w = amplitude * (prod_periodic sin(2 pi t_a) + tilt * sum_interval t_a)`
    /// and `t_a` the chart coordinate rescaled to `[0,1]`.
    ConformalBump { amplitude: f64, tilt: f64, ranges: Vec<(f64, f64, bool)> },
    /// Conformal bump plus the anisotropic perturbation
    /// `amplitude * index^(-decay) * psi(x) e_axis (x) e_axis` with
    /// `psi = prod_periodic sin(2 pi t_a)`.
    PerturbedSequence {
        base: Box<MetricFormula>,
        amplitude: f64,
        index: f64,
        decay: f64,
        axis: usize,
        ranges: Vec<(f64, f64, bool)>,
    },
}

fn take(params: &BTreeMap<String, f64>, allowed: &[&str], id: &str) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::InvalidParameter(format!("`{k}` is not a parameter of metric `{id}` (allowed: {allowed:?})")));
        }
    }
    Ok(())
}

fn get(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

impl MetricFormula {
    pub const IDS: [&'static str; 4] = ["flat", "diag-cylinder", "conformal-bump", "perturbed-sequence"];

    pub fn parse(id: &str, params: &BTreeMap<String, f64>, axes: &[AxisSpec]) -> Result<Self> {
        let ranges: Vec<(f64, f64, bool)> = axes.iter().map(|a| (a.lo, a.hi - a.lo, a.periodic)).collect();
        match id {
            "flat" => {
                take(params, &["scale"], id)?;
                let scale = get(params, "scale", 1.0);
                if !(scale > 0.0) {
                    return Err(Error::InvalidParameter("flat: scale must be positive".into()));
                }
                Ok(Self::Flat { scale })
            }
            "diag-cylinder" => {
                take(params, &[], id)?;
                if axes.len() < 2 {
                    return Err(Error::InvalidParameter("diag-cylinder needs at least two axes".into()));
                }
                Ok(Self::DiagCylinder)
            }
            "conformal-bump" => {
                take(params, &["amplitude", "tilt"], id)?;
                Ok(Self::ConformalBump {
                    amplitude: get(params, "amplitude", 0.1),
                    tilt: get(params, "tilt", 1.0),
                    ranges,
                })
            }
            "perturbed-sequence" => {
                take(params, &["base_amplitude", "tilt", "amplitude", "index", "decay", "axis"], id)?;
                let index = get(params, "index", 1.0);
                if !(index >= 1.0) {
                    return Err(Error::InvalidParameter("perturbed-sequence: index must be >= 1".into()));
                }
                let axis = get(params, "axis", 0.0);
                if axis < 0.0 || axis.fract() != 0.0 || axis as usize >= axes.len() {
                    return Err(Error::InvalidParameter(format!("perturbed-sequence: invalid axis {axis}")));
                }
                Ok(Self::PerturbedSequence {
                    base: Box::new(Self::ConformalBump {
                        amplitude: get(params, "base_amplitude", 0.1),
                        tilt: get(params, "tilt", 1.0),
                        ranges: ranges.clone(),
                    }),
                    amplitude: get(params, "amplitude", 0.2),
                    index,
                    decay: get(params, "decay", 1.0),
                    axis: axis as usize,
                    ranges,
                })
            }
            other => Err(Error::UnknownFormula(other.to_string())),
        }
    }

    /// Perturbation amplitude at the configured index (sequence family only).
    pub fn perturbation_amplitude(&self) -> f64 {
        match self {
            Self::PerturbedSequence { amplitude, index, decay, .. } => amplitude * index.powf(-decay),
            _ => 0.0,
        }
    }

    fn bump_log<T: Real>(amplitude: f64, tilt: f64, ranges: &[(f64, f64, bool)], x: &[T]) -> T {
        let tau = T::TAU();
        let mut prod = T::one();
        let mut any_periodic = false;
        let mut lin = T::zero();
        for (a, &(lo, len, periodic)) in ranges.iter().enumerate() {
            let t = (x[a] - T::lit(lo)) / T::lit(len);
            if periodic {
                prod = prod * (tau * t).sin();
                any_periodic = true;
            } else {
                lin = lin + t;
            }
        }
        if !any_periodic {
            prod = T::zero();
        }
        T::lit(amplitude) * (prod + T::lit(tilt) * lin)
    }

    /// Profile of the sequence perturbation.
    pub fn sequence_profile<T: Real>(ranges: &[(f64, f64, bool)], x: &[T]) -> T {
        let tau = T::TAU();
        let mut prod = T::one();
        for (a, &(lo, len, periodic)) in ranges.iter().enumerate() {
            if periodic {
                prod = prod * (tau * (x[a] - T::lit(lo)) / T::lit(len)).sin();
            }
        }
        prod
    }

    /// Metric components at coordinates `x` (row-major `n x n`).
    pub fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let n = x.len();
        let mut g = vec![T::zero(); n * n];
        match self {
            Self::Flat { scale } => {
                for i in 0..n {
                    g[i * n + i] = T::lit(*scale);
                }
            }
            Self::DiagCylinder => {
                for i in 0..n {
                    g[i * n + i] = T::one();
                }
                g[n + 1] = x[0] * x[0];
            }
            Self::ConformalBump { amplitude, tilt, ranges } => {
                let e = (Self::bump_log(*amplitude, *tilt, ranges, x) * T::lit(2.0)).exp();
                for i in 0..n {
                    g[i * n + i] = e;
                }
            }
            Self::PerturbedSequence { base, amplitude, index, decay, axis, ranges } => {
                g = base.eval(x);
                let amp = T::lit(amplitude * index.powf(-decay));
                g[axis * n + axis] = g[axis * n + axis] + amp * Self::sequence_profile(ranges, x);
            }
        }
        g
    }

    /// Analytic log-factor for conformally flat families.
    pub fn log_factor<T: Real>(&self, x: &[T]) -> Option<T> {
        match self {
            Self::Flat { scale } => Some(T::lit(scale.ln() * 0.5)),
            Self::ConformalBump { amplitude, tilt, ranges } => Some(Self::bump_log(*amplitude, *tilt, ranges, x)),
            _ => None,
        }
    }
}

/// Builds a pointed manifold from a spec: validates the chart, evaluates
/// the metric formula at every node and picks the basepoint.
pub fn build_box_manifold<T: Real>(spec: &ManifoldSpec) -> Result<DiscreteManifold<T>> {
    if spec.dim < 3 {
        return Err(Error::Dimension(spec.dim));
    }
    let lattice = spec.lattice::<T>()?;
    let formula = spec.formula()?;
    let metric = MetricField::from_fn(&lattice, |x| formula.eval(x));
    let basepoint = match &spec.basepoint {
        Some(p) => {
            if p.len() != spec.dim {
                return Err(Error::Basepoint(format!("{} coordinates given for dimension {}", p.len(), spec.dim)));
            }
            let x: Vec<T> = p.iter().map(|v| T::lit(*v)).collect();
            lattice.nearest_node(&x)
        }
        None => {
            let idx: Vec<usize> = lattice.axes().iter().map(|a| a.nodes / 2).collect();
            lattice.node(&idx)
        }
    };
    DiscreteManifold::new(lattice, metric, basepoint)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dimension_two() {
        let mut s = ManifoldSpec::flat_slab(6);
        s.dim = 2;
        s.axes.pop();
        assert!(matches!(build_box_manifold::<f64>(&s), Err(Error::Dimension(2))));
    }

    #[test]
    fn rejects_too_few_nodes() {
        let s = ManifoldSpec::flat_torus(4);
        assert!(matches!(build_box_manifold::<f64>(&s), Err(Error::TooFewNodes { .. })));
    }

    #[test]
    fn non_spd_names_node() {
        let mut s = ManifoldSpec::cylinder(6);
        s.axes[0].lo = 0.0;
        match build_box_manifold::<f64>(&s) {
            Err(Error::NotPositiveDefinite { node, coords }) => {
                assert_eq!(coords[0], 0.0);
                assert!(node < 6 * 36);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_formula_and_param() {
        let mut s = ManifoldSpec::flat_torus(6);
        s.metric = "round".into();
        assert!(matches!(build_box_manifold::<f64>(&s), Err(Error::UnknownFormula(_))));
        let s = ManifoldSpec::flat_torus(6).with_param("amplitude", 1.0);
        assert!(matches!(build_box_manifold::<f64>(&s), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn slab_basepoint_mid() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::flat_slab(17)).unwrap();
        assert_eq!(m.lattice().coords(m.basepoint())[2], 0.5);
        assert_eq!(m.faces().len(), 2);
        assert_eq!(m.boundary_nodes().len(), 2 * 17 * 17);
    }

    #[test]
    fn sequence_amplitude_law() {
        let s = ManifoldSpec::flat_slab(6)
            .with_param("amplitude", 0.3)
            .with_param("index", 4.0);
        let mut s = s;
        s.metric = "perturbed-sequence".into();
        let f = s.formula().unwrap();
        assert!((f.perturbation_amplitude() - 0.075).abs() < 1e-15);
    }
}
