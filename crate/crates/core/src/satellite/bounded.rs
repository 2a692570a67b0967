use std::collections::HashMap;

use crate::conformal::{convexity_radius_among, max_supported_k, quasi_flatzoomer_psi, ConformalFactor, ConvexityOptions};
use crate::error::Result;
use crate::geometry::{boundary_geometry_with, christoffel, curvature_derivative_norms, face_manifold, ConnectionField};
use crate::grid::{distances_from_set, winding_loop, DiscreteManifold, GraphFilter};
use crate::scalar::Real;

/// One checked item: measured value against its threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub item: String,
    pub measured: f64,
    pub threshold: f64,
    pub passes: bool,
    /// Reported but not part of the overall verdict.
    pub informational: bool,
    pub detail: String,
}

impl Verdict {
    fn at_least(item: impl Into<String>, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        // relative tolerance keeps exact equalities (e.g. a mid-slab
        // basepoint) from failing on round-off
        let passes = measured >= threshold * (1.0 - 1e-12);
        Self { item: item.into(), measured, threshold, passes, informational: false, detail: detail.into() }
    }

    fn at_most(item: impl Into<String>, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        let passes = measured <= threshold * (1.0 + 1e-12);
        Self { item: item.into(), measured, threshold, passes, informational: false, detail: detail.into() }
    }
}

#[derive(Clone, Debug)]
pub struct BoundedGeometryReport {
    pub c: f64,
    pub k: usize,
    pub verdicts: Vec<Verdict>,
}

impl BoundedGeometryReport {
    pub fn passes(&self) -> bool {
        self.verdicts.iter().all(|v| v.passes || v.informational)
    }

    pub fn failing(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passes && !v.informational).collect()
    }

    pub fn get(&self, item: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.item == item)
    }

    /// Fixed-width verdict table.
    pub fn table(&self) -> String {
        let mut s = format!("{:<28} {:>14} {:>14}  verdict\n", "item", "measured", "threshold");
        for v in &self.verdicts {
            let verdict = match (v.informational, v.passes) {
                (true, _) => "info",
                (false, true) => "pass",
                (false, false) => "FAIL",
            };
            s.push_str(&format!("{:<28} {:>14.6e} {:>14.6e}  {}", v.item, v.measured, v.threshold, verdict));
            if !v.detail.is_empty() {
                s.push_str(&format!("  ({})", v.detail));
            }
            s.push('\n');
        }
        s
    }
}

/// Start nodes for loops winding around `axis`: up to 16 nodes of the
/// slice `index_along(axis) == 0` (every such loop crosses it).
fn slice_starts<T: Real>(m: &DiscreteManifold<T>, axis: usize) -> Vec<usize> {
    let lat = m.lattice();
    let slice: Vec<usize> = (0..m.len()).filter(|&v| lat.index_along(v, axis) == 0).collect();
    let stride = slice.len().div_ceil(16).max(1);
    slice.into_iter().step_by(stride).collect()
}

/// Shortest graph loop winding once around some periodic axis.
pub(crate) fn systole<T: Real>(m: &DiscreteManifold<T>) -> T {
    let lat = m.lattice();
    let mut best = T::infinity();
    for a in 0..lat.dim() {
        if lat.axis(a).periodic {
            best = best.min(winding_loop(m, a, &slice_starts(m, a), &GraphFilter::default()));
        }
    }
    best
}

/// Normal geodesic flow from every boundary node up to `length`;
/// returns the first collision `(node, start a, start b)` or an exit.
enum Flow {
    Injective,
    Collision(usize, usize, usize),
    Exit(usize),
}

fn normal_flow<T: Real>(m: &DiscreteManifold<T>, conn: &ConnectionField<T>, length: T) -> Flow {
    let n = m.dim();
    let lat = m.lattice();
    let bd = boundary_geometry_with(m, conn);
    let ds = lat.min_spacing() * T::lit(0.5);
    let steps = (length / ds).ceil().to_usize().unwrap_or(0);
    let slack = T::lit(1e-9);
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let accel = |x: &[T], v: &[T]| -> Option<Vec<T>> {
        let g = lat.interpolate(&conn.gamma, n * n * n, x, slack)?;
        let mut a = vec![T::zero(); n];
        for c in 0..n {
            let mut s = T::zero();
            for i in 0..n {
                for j in 0..n {
                    s = s + g[(c * n + i) * n + j] * v[i] * v[j];
                }
            }
            a[c] = -s;
        }
        Some(a)
    };
    for f in &bd.faces {
        for (k, &y) in f.nodes.iter().enumerate() {
            let mut x = lat.coords(y);
            let mut v: Vec<T> = f.normal[k * n..(k + 1) * n].to_vec();
            let mut travelled = T::zero();
            let mut visit = |node: usize| -> Option<Flow> {
                match owner.get(&node) {
                    Some(&o) if o != y => Some(Flow::Collision(node, o, y)),
                    Some(_) => None,
                    None => {
                        owner.insert(node, y);
                        None
                    }
                }
            };
            if let Some(c) = visit(y) {
                return c;
            }
            for _ in 0..steps {
                let dt = ds.min(length - travelled);
                if !(dt > T::zero()) {
                    break;
                }
                let half = dt * T::lit(0.5);
                let Some(a0) = accel(&x, &v) else { return Flow::Exit(y) };
                let xm: Vec<T> = (0..n).map(|i| x[i] + half * v[i]).collect();
                let vm: Vec<T> = (0..n).map(|i| v[i] + half * a0[i]).collect();
                let Some(am) = accel(&xm, &vm) else { return Flow::Exit(y) };
                for i in 0..n {
                    x[i] = x[i] + dt * vm[i];
                    v[i] = v[i] + dt * am[i];
                }
                travelled = travelled + dt;
                if !lat.contains(&x, slack) {
                    return Flow::Exit(y);
                }
                if let Some(c) = visit(lat.nearest_node(&x)) {
                    return c;
                }
            }
        }
    }
    Flow::Injective
}

/// Checks of the bounded-geometry conditions with constant `c` and
/// curvature order `k`:
///
/// - `collar-injectivity`: the normal geodesic flow from the boundary up
///   to length `1/c` never sends two boundary nodes to the same node;
/// - `boundary-inj-proxy`: half the shortest winding loop of each face;
/// - `interior-conv-proxy` and `interior-systole-proxy`: the graph
///   convexity radius at nodes at least `1/c` from the boundary and half
///   the shortest winding loop;
/// - `curvature-l{l}` and `boundary-curvature-l{l}`: `sup |nabla^l Rm|`;
/// - `basepoint-distance`: `d(x, boundary) >= 2/c`.
pub fn bounded_geometry_report<T: Real>(m: &DiscreteManifold<T>, c: f64, k: usize) -> Result<BoundedGeometryReport> {
    let inv = 1.0 / c;
    let conn = christoffel(m)?;
    let mut verdicts = Vec::new();

    if m.has_boundary() {
        let detail;
        let ok = match normal_flow(m, &conn, T::lit(inv)) {
            Flow::Injective => {
                detail = String::new();
                true
            }
            Flow::Collision(node, a, b) => {
                detail = format!("flows from nodes {a} and {b} meet at node {node}");
                false
            }
            Flow::Exit(y) => {
                detail = format!("flow from node {y} leaves the chart");
                false
            }
        };
        verdicts.push(Verdict {
            item: "collar-injectivity".into(),
            measured: if ok { inv } else { 0.0 },
            threshold: inv,
            passes: ok,
            informational: false,
            detail,
        });
        let bd = boundary_geometry_with(m, &conn);
        let mut face_sys = f64::INFINITY;
        let mut face_curv: Vec<f64> = Vec::new();
        for f in &bd.faces {
            let (fm, _) = face_manifold(m, f)?;
            face_sys = face_sys.min(systole(&fm).to_f());
            let lmax = k.min(2).min(max_supported_k(&fm));
            for (l, x) in curvature_derivative_norms(&fm, lmax)?.into_iter().enumerate() {
                if face_curv.len() <= l {
                    face_curv.push(0.0);
                }
                face_curv[l] = face_curv[l].max(x.to_f());
            }
        }
        verdicts.push(Verdict::at_least("boundary-inj-proxy", face_sys / 2.0, inv, "half the shortest winding loop of the faces"));
        for (l, x) in face_curv.into_iter().enumerate() {
            verdicts.push(Verdict::at_most(format!("boundary-curvature-l{l}"), x, c, ""));
        }
    }

    let dist_b = if m.has_boundary() {
        distances_from_set(m, m.boundary_nodes(), &GraphFilter::default())
    } else {
        vec![T::infinity(); m.len()]
    };
    let away: Vec<usize> = (0..m.len()).filter(|&v| dist_b[v].to_f() >= inv).collect();
    if away.is_empty() {
        verdicts.push(Verdict::at_least("interior-conv-proxy", 0.0, inv, "no node lies 1/c away from the boundary"));
    } else {
        let (conv, witnessed) = convexity_radius_among(m, &away, &ConvexityOptions::default());
        let detail = if witnessed { "graph convexity radius" } else { "no non-convex ball found; largest radius tested" };
        verdicts.push(Verdict::at_least("interior-conv-proxy", conv.to_f(), inv, detail));
    }
    verdicts.push(Verdict::at_least("interior-systole-proxy", systole(m).to_f() / 2.0, inv, "half the shortest winding loop"));
    let psi = quasi_flatzoomer_psi(m, &ConformalFactor::constant(m.len(), T::zero()), &ConvexityOptions::default())?;
    let mut info = Verdict::at_least("inverse-psi", 1.0 / psi.psi.to_f(), inv, "reported only");
    info.informational = true;
    verdicts.push(info);

    let supported = max_supported_k(m);
    let lmax = k.min(2).min(supported);
    let note = if lmax < k.min(2) { format!("grid supports l <= {supported}") } else { String::new() };
    for (l, x) in curvature_derivative_norms(m, lmax)?.into_iter().enumerate() {
        verdicts.push(Verdict::at_most(format!("curvature-l{l}"), x.to_f(), c, note.clone()));
    }

    let d = dist_b[m.basepoint()].to_f();
    verdicts.push(Verdict::at_least("basepoint-distance", d, 2.0 * inv, ""));
    Ok(BoundedGeometryReport { c, k, verdicts })
}
