use super::seeley::{extend_lattice_field, positive_logs, SeeleyScheme};
use crate::error::{Error, Result};
use crate::grid::{DiscreteManifold, Lattice, MetricField, ScalarField};
use crate::linalg;
use crate::scalar::Real;

/// One collar chart: a constant reference metric `e` on the coordinate box
/// and its partition weight `psi`.
#[derive(Clone, Debug)]
pub struct CollarChart<T> {
    pub reference: Vec<T>,
    pub weight: ScalarField<T>,
}

#[derive(Clone, Debug)]
pub struct CollarAtlas<T> {
    pub charts: Vec<CollarChart<T>>,
    /// `max_l ||psi_l||_{C^2}`.
    pub c0: T,
    /// Largest number of charts with nonzero weight at one node.
    pub multiplicity: usize,
    /// `sup |sum_l psi_l - 1|`.
    pub partition_residual: T,
}

impl<T: Real> CollarAtlas<T> {
    /// The whole box as one chart with the coordinate metric as reference.
    pub fn single(m: &DiscreteManifold<T>) -> Self {
        let chart = CollarChart { reference: linalg::identity(m.dim()), weight: ScalarField::constant(m.len(), T::one()) };
        Self { charts: vec![chart], c0: T::one(), multiplicity: 1, partition_residual: T::zero() }
    }

    pub fn new(m: &DiscreteManifold<T>, charts: Vec<CollarChart<T>>) -> Result<Self> {
        let n = m.dim();
        if charts.is_empty() {
            return Err(Error::InvalidParameter("atlas without charts".into()));
        }
        for (l, ch) in charts.iter().enumerate() {
            if ch.weight.len() != m.len() || ch.reference.len() != n * n {
                return Err(Error::Shape(format!("chart {l} does not match the manifold")));
            }
            if linalg::cholesky(&ch.reference, n).is_none() {
                return Err(Error::NotPositiveDefinite { node: l, coords: Vec::new() });
            }
            if let Some(v) = ch.weight.iter().position(|w| *w < T::zero()) {
                return Err(Error::InvalidParameter(format!("chart {l}: negative weight at node {v}")));
            }
        }
        let mut residual = T::zero();
        let mut multiplicity = 0;
        let tiny = T::epsilon() * T::lit(16.0);
        for v in 0..m.len() {
            let s: T = charts.iter().map(|c| c.weight[v]).sum();
            residual = residual.max((s - T::one()).abs());
            multiplicity = multiplicity.max(charts.iter().filter(|c| c.weight[v] > tiny).count());
        }
        if !(residual <= T::lit(1e-10)) {
            return Err(Error::InvalidParameter(format!("weights do not sum to one (residual {:e})", residual.to_f())));
        }
        let c0 = charts
            .iter()
            .map(|c| crate::spectral::c2_norm(m, &c.weight, 1))
            .fold(T::zero(), |a, b| a.max(b));
        Ok(Self { charts, c0, multiplicity, partition_residual: residual })
    }
}

/// `M` inside a larger box `X` carrying the extended metric.
#[derive(Clone, Debug)]
pub struct ExtendedManifold<T> {
    pub manifold: DiscreteManifold<T>,
    pub original: DiscreteManifold<T>,
    /// Nodes added at the (low, high) end of each axis.
    pub layers: Vec<(usize, usize)>,
    pub depth: T,
    pub order: usize,
    /// Extended partition weights on `X`.
    pub weights: Vec<ScalarField<T>>,
    pub multiplicity: usize,
    /// Some Seeley sample was clamped to the far end of a line.
    pub clamped: bool,
    /// `min` eigenvalue of the extended metric over `X`.
    pub min_eigenvalue: T,
    /// Smallest value of `lambda_min(g_l0) / m0` over `X`, `l0` the chart
    /// of largest weight.
    pub floor: T,
    pub floor_holds: bool,
}

impl<T: Real> ExtendedManifold<T> {
    /// Node of `X` corresponding to a node of `M`.
    pub fn embed(&self, node: usize) -> usize {
        let mut idx = self.original.lattice().multi_index(node);
        for (a, i) in idx.iter_mut().enumerate() {
            *i += self.layers[a].0;
        }
        self.manifold.lattice().node(&idx)
    }

    /// Node of `M` at a node of `X`, if any.
    pub fn restrict(&self, node: usize) -> Option<usize> {
        let mut idx = self.manifold.lattice().multi_index(node);
        for (a, i) in idx.iter_mut().enumerate() {
            let lo = self.layers[a].0;
            if *i < lo || *i >= lo + self.original.lattice().axis(a).nodes {
                return None;
            }
            *i -= lo;
        }
        Some(self.original.lattice().node(&idx))
    }

    /// Extends a positive field of `M` by `exp(E ln u)`; returns the field
    /// on `X` and the guaranteed lower bound.
    pub fn extend_positive(&self, scheme: &SeeleyScheme<T>, u: &[T]) -> Result<(ScalarField<T>, T)> {
        let logs = positive_logs(u)?;
        let (_, out, _) = extend_lattice_field(self.original.lattice(), &logs, 1, scheme, &self.layers)?;
        let inf = crate::scalar::min_of(u.iter().copied());
        let sup = crate::scalar::max_of(u.iter().copied());
        let mut f: Vec<T> = out.into_iter().map(|x| x.exp()).collect();
        for (v, x) in u.iter().enumerate() {
            f[self.embed(v)] = *x;
        }
        Ok((ScalarField(f), scheme.beta(inf, sup)))
    }

    pub fn report(&self) -> String {
        let ax: Vec<String> = self
            .manifold
            .lattice()
            .axes()
            .iter()
            .zip(&self.layers)
            .map(|(a, l)| format!("[{}, {}] ({} + {} + {} nodes)", a.lo(), a.hi(), l.0, a.nodes - l.0 - l.1, l.1))
            .collect();
        format!(
            "order = {}\ndepth = {:?}\naxes = {}\nnodes = {}\nmultiplicity = {}\nclamped = {}\nmin_eigenvalue = {:?}\nfloor = {:?}\nfloor_holds = {}\n",
            self.order,
            self.depth.to_f(),
            ax.join(" x "),
            self.manifold.len(),
            self.multiplicity,
            self.clamped,
            self.min_eigenvalue.to_f(),
            self.floor.to_f(),
            self.floor_holds
        )
    }
}

pub fn extend_metric<T: Real>(m: &DiscreteManifold<T>, scheme: &SeeleyScheme<T>, depth: T) -> Result<ExtendedManifold<T>> {
    extend_metric_with(m, &CollarAtlas::single(m), scheme, depth)
}

/// Extends `g` by `depth` (coordinate units, rounded up to whole cells)
/// beyond every boundary face. Per chart, `ln(e^{-1/2} g e^{-1/2})` is
/// extended entrywise, exponentiated and conjugated back; the charts are
/// glued with the extended weights. On `M` the metric is copied exactly.
pub fn extend_metric_with<T: Real>(
    m: &DiscreteManifold<T>,
    atlas: &CollarAtlas<T>,
    scheme: &SeeleyScheme<T>,
    depth: T,
) -> Result<ExtendedManifold<T>> {
    if !m.has_boundary() {
        return Err(Error::EmptyBoundary);
    }
    if !(depth > T::zero()) {
        return Err(Error::InvalidParameter(format!("extension depth {depth} must be positive")));
    }
    let n = m.dim();
    let nn = n * n;
    let lat = m.lattice();
    let layers: Vec<(usize, usize)> = lat
        .axes()
        .iter()
        .map(|a| {
            if a.periodic {
                (0, 0)
            } else {
                let k = (depth / a.h - T::lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
                (k, k)
            }
        })
        .collect();

    let mut big: Option<Lattice<T>> = None;
    let mut clamped = false;
    let mut weights = Vec::new();
    let mut per_chart = Vec::new();
    for ch in &atlas.charts {
        let root = linalg::sym_apply(&ch.reference, n, |x| x.sqrt()).ok_or_else(|| Error::Eigen("reference".into()))?;
        let inv_root =
            linalg::sym_apply(&ch.reference, n, |x| T::one() / x.sqrt()).ok_or_else(|| Error::Eigen("reference".into()))?;
        let mut logs = Vec::with_capacity(m.len() * nn);
        for v in 0..m.len() {
            let a = linalg::matmul(&linalg::matmul(&inv_root, m.metric().at(v), n), &inv_root, n);
            let a = symmetrize(&a, n);
            logs.extend(linalg::sym_log(&a, n).ok_or_else(|| Error::Eigen(format!("log at node {v}")))?);
        }
        let (l, ext, c) = extend_lattice_field(lat, &logs, nn, scheme, &layers)?;
        clamped |= c;
        let mut g = Vec::with_capacity(ext.len());
        for (v, a) in ext.chunks(nn).enumerate() {
            let e = linalg::sym_exp(&symmetrize(a, n), n).ok_or_else(|| Error::Eigen(format!("exp at node {v}")))?;
            g.extend(symmetrize(&linalg::matmul(&linalg::matmul(&root, &e, n), &root, n), n));
        }
        per_chart.push(g);
        let (_, w, c) = extend_lattice_field(lat, &ch.weight, 1, scheme, &layers)?;
        clamped |= c;
        weights.push(ScalarField(w));
        big = Some(l);
    }
    let big = big.expect("atlas has a chart");

    let mut data = vec![T::zero(); big.len() * nn];
    for v in 0..big.len() {
        for (g, w) in per_chart.iter().zip(&weights) {
            for i in 0..nn {
                data[v * nn + i] = data[v * nn + i] + w[v] * g[v * nn + i];
            }
        }
    }
    for v in 0..m.len() {
        let w = embed_index(lat, &big, &layers, v);
        data[w * nn..(w + 1) * nn].copy_from_slice(m.metric().at(v));
    }

    let m0 = T::of(atlas.multiplicity.max(1));
    let mut min_eigenvalue = T::infinity();
    let mut floor = T::infinity();
    let mut floor_holds = true;
    for v in 0..big.len() {
        let g = &data[v * nn..(v + 1) * nn];
        let (vals, _) = linalg::sym_eigen(g, n).ok_or_else(|| Error::Eigen(format!("extended metric at node {v}")))?;
        min_eigenvalue = min_eigenvalue.min(vals[0]);
        let l0 = (0..weights.len()).fold(0, |b, l| if weights[l][v] > weights[b][v] { l } else { b });
        let (v0, _) = linalg::sym_eigen(&per_chart[l0][v * nn..(v + 1) * nn], n)
            .ok_or_else(|| Error::Eigen(format!("chart metric at node {v}")))?;
        let bound = v0[0] / m0;
        floor = floor.min(bound);
        if vals[0] < bound * (T::one() - T::lit(1e-10)) {
            floor_holds = false;
        }
    }
    let basepoint = embed_index(lat, &big, &layers, m.basepoint());
    let manifold = DiscreteManifold::new_any_dim(big, MetricField::from_vec(n, data)?, basepoint)?;
    Ok(ExtendedManifold {
        manifold,
        original: m.clone(),
        layers,
        depth,
        order: scheme.order(),
        weights,
        multiplicity: atlas.multiplicity,
        clamped,
        min_eigenvalue,
        floor,
        floor_holds,
    })
}

fn embed_index<T: Real>(small: &Lattice<T>, big: &Lattice<T>, layers: &[(usize, usize)], v: usize) -> usize {
    let mut idx = small.multi_index(v);
    for (a, i) in idx.iter_mut().enumerate() {
        *i += layers[a].0;
    }
    big.node(&idx)
}

fn symmetrize<T: Real>(a: &[T], n: usize) -> Vec<T> {
    let half = T::lit(0.5);
    let mut out = a.to_vec();
    for i in 0..n {
        for j in i + 1..n {
            let s = half * (a[i * n + j] + a[j * n + i]);
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_box_manifold, ManifoldSpec};

    #[test]
    fn two_chart_atlas_floor() {
        // psi_1 = cos^2(pi x), psi_2 = sin^2(pi x) along the periodic axis,
        // reference metrics delta and diag(2, 1, 1)
        let m = build_box_manifold::<f64>(&ManifoldSpec::bump_slab(12, 0.2)).unwrap();
        let pi = std::f64::consts::PI;
        let w1 = ScalarField::from_fn(m.lattice(), |x| (pi * x[0]).cos().powi(2));
        let w2 = ScalarField::from_fn(m.lattice(), |x| (pi * x[0]).sin().powi(2));
        let e2 = vec![2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let atlas = CollarAtlas::new(
            &m,
            vec![
                CollarChart { reference: linalg::identity(3), weight: w1 },
                CollarChart { reference: e2, weight: w2 },
            ],
        )
        .unwrap();
        assert_eq!(atlas.multiplicity, 2);
        assert!(atlas.partition_residual < 1e-12);
        assert!(atlas.c0 > 1.0);
        let scheme = SeeleyScheme::geometric(2).unwrap();
        let x = extend_metric_with(&m, &atlas, &scheme, 0.2).unwrap();
        assert!(x.floor_holds, "{}", x.report());
        assert!(x.min_eigenvalue > 0.0);
        for v in 0..m.len() {
            assert_eq!(x.manifold.metric().at(x.embed(v)), m.metric().at(v));
            assert_eq!(x.restrict(x.embed(v)), Some(v));
        }
        // weights depend on the periodic coordinate only, so they extend
        // unchanged and keep summing to one
        for v in 0..x.manifold.len() {
            let s = x.weights[0][v] + x.weights[1][v];
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_manifold_has_nothing_to_extend() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::flat_torus(6)).unwrap();
        let s = SeeleyScheme::geometric(1).unwrap();
        assert!(matches!(extend_metric(&m, &s, 0.1), Err(Error::EmptyBoundary)));
    }
}
