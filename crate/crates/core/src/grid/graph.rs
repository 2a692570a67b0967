//! Shortest-path distances on the metric graph of a lattice.
//!
//! Every node is joined to all `3^n - 1` neighbours of its cell
//! neighbourhood; an edge has the length of its coordinate displacement
//! measured in the average of the endpoint metrics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::DiscreteManifold;
use crate::linalg;
use crate::scalar::Real;

#[derive(Clone, Copy)]
struct Entry<T> {
    dist: T,
    node: usize,
}

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T: Real> Eq for Entry<T> {}
impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Real> Ord for Entry<T> {
    // min-heap on (dist, node)
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist.partial_cmp(&self.dist).unwrap_or(Ordering::Equal).then_with(|| o.node.cmp(&self.node))
    }
}

/// Restricts the graph to a subset of nodes and/or displacement axes.
#[derive(Clone, Debug, Default)]
pub struct GraphFilter {
    /// Allowed nodes (`None` = all).
    pub nodes: Option<Vec<bool>>,
    /// Axes along which steps are forbidden (used for boundary faces).
    pub frozen_axis: Option<usize>,
}

pub(crate) fn offsets(n: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for k in 0..total {
        let mut o = Vec::with_capacity(n);
        let mut r = k;
        for _ in 0..n {
            o.push((r % 3) as isize - 1);
            r /= 3;
        }
        if o.iter().any(|&x| x != 0) {
            out.push(o);
        }
    }
    out
}

/// Neighbour of `v` displaced by `off` (cell steps), if it exists.
pub(crate) fn step<T: Real>(m: &DiscreteManifold<T>, v: usize, off: &[isize]) -> Option<usize> {
    let mut w = v;
    for (a, &d) in off.iter().enumerate() {
        if d != 0 {
            w = m.lattice().shift(w, a, d)?;
        }
    }
    Some(w)
}

pub(crate) fn edge_length<T: Real>(m: &DiscreteManifold<T>, u: usize, v: usize, off: &[isize]) -> T {
    let n = m.dim();
    let gu = m.metric().at(u);
    let gv = m.metric().at(v);
    let dx: Vec<T> = (0..n).map(|a| T::from_isize(off[a]).unwrap() * m.lattice().axis(a).h).collect();
    let half = T::lit(0.5);
    let mut s = T::zero();
    for i in 0..n {
        if dx[i] == T::zero() {
            continue;
        }
        for j in 0..n {
            if dx[j] == T::zero() {
                continue;
            }
            s = s + (gu[i * n + j] + gv[i * n + j]) * half * dx[i] * dx[j];
        }
    }
    s.sqrt()
}

/// Dijkstra result with predecessor links.
#[derive(Clone, Debug)]
pub struct ShortestPathTree<T> {
    pub dist: Vec<T>,
    pub pred: Vec<usize>,
}

impl<T: Real> ShortestPathTree<T> {
    /// Nodes on the path from the source to `target`, source first.
    pub fn path(&self, target: usize) -> Vec<usize> {
        let mut p = vec![target];
        let mut v = target;
        while self.pred[v] != usize::MAX {
            v = self.pred[v];
            p.push(v);
        }
        p.reverse();
        p
    }

    /// Path node whose distance from the source is closest to half the
    /// path length.
    pub fn midpoint(&self, target: usize) -> usize {
        let half = self.dist[target] * T::lit(0.5);
        let mut best = target;
        let mut gap = (self.dist[target] - half).abs();
        let mut v = target;
        while self.pred[v] != usize::MAX {
            v = self.pred[v];
            let g = (self.dist[v] - half).abs();
            if g < gap {
                gap = g;
                best = v;
            }
        }
        best
    }
}

fn dijkstra<T: Real>(
    m: &DiscreteManifold<T>,
    sources: &[usize],
    filter: &GraphFilter,
    stop_at: Option<usize>,
) -> ShortestPathTree<T> {
    let n = m.dim();
    let offs: Vec<Vec<isize>> = offsets(n)
        .into_iter()
        .filter(|o| filter.frozen_axis.map_or(true, |a| o[a] == 0))
        .collect();
    let mut dist = vec![T::infinity(); m.len()];
    let mut pred = vec![usize::MAX; m.len()];
    let mut done = vec![false; m.len()];
    let mut heap = BinaryHeap::new();
    let allowed = |v: usize| filter.nodes.as_ref().map_or(true, |f| f[v]);
    for &s in sources {
        if allowed(s) {
            dist[s] = T::zero();
            heap.push(Entry { dist: T::zero(), node: s });
        }
    }
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if stop_at == Some(u) {
            break;
        }
        for off in &offs {
            let Some(v) = step(m, u, off) else { continue };
            if done[v] || !allowed(v) {
                continue;
            }
            let nd = d + edge_length(m, u, v, off);
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(Entry { dist: nd, node: v });
            }
        }
    }
    ShortestPathTree { dist, pred }
}

/// Distances from `source` to every node.
pub fn distances_from<T: Real>(m: &DiscreteManifold<T>, source: usize) -> Vec<T> {
    dijkstra(m, &[source], &GraphFilter::default(), None).dist
}

/// Distances to the nearest of several sources.
pub fn distances_from_set<T: Real>(m: &DiscreteManifold<T>, sources: &[usize], filter: &GraphFilter) -> Vec<T> {
    dijkstra(m, sources, filter, None).dist
}

pub fn shortest_path_tree<T: Real>(m: &DiscreteManifold<T>, source: usize) -> ShortestPathTree<T> {
    dijkstra(m, &[source], &GraphFilter::default(), None)
}

/// Graph distance between two nodes; infinite if unreachable.
pub fn graph_distance<T: Real>(m: &DiscreteManifold<T>, a: usize, b: usize) -> T {
    if a == b {
        return T::zero();
    }
    dijkstra(m, &[a], &GraphFilter::default(), Some(b)).dist[b]
}

/// Nodes at graph distance `< r` from `center`, ascending.
pub fn metric_ball<T: Real>(m: &DiscreteManifold<T>, center: usize, r: T) -> Vec<usize> {
    let d = distances_from(m, center);
    (0..m.len()).filter(|&v| d[v] < r).collect()
}

/// Length of the shortest closed graph loop winding once around periodic
/// axis `axis`, minimised over the given start nodes.
pub(crate) fn winding_loop<T: Real>(
    m: &DiscreteManifold<T>,
    axis: usize,
    starts: &[usize],
    filter: &GraphFilter,
) -> T {
    let lat = m.lattice();
    let nodes = lat.axis(axis).nodes as isize;
    let offs: Vec<Vec<isize>> = offsets(m.dim())
        .into_iter()
        .filter(|o| filter.frozen_axis.map_or(true, |a| o[a] == 0))
        .collect();
    let allowed = |v: usize| filter.nodes.as_ref().map_or(true, |f| f[v]);
    // States are (node, winding) with winding in -2..=2.
    const W: isize = 2;
    let width = (2 * W + 1) as usize;
    let mut best = T::infinity();
    for &s in starts {
        if !allowed(s) {
            continue;
        }
        let mut dist = vec![T::infinity(); m.len() * width];
        let mut done = vec![false; m.len() * width];
        let state = |v: usize, w: isize| v * width + (w + W) as usize;
        let mut heap = BinaryHeap::new();
        dist[state(s, 0)] = T::zero();
        heap.push(Entry { dist: T::zero(), node: state(s, 0) });
        while let Some(Entry { dist: d, node: st }) = heap.pop() {
            if done[st] {
                continue;
            }
            done[st] = true;
            if d >= best {
                break;
            }
            let u = st / width;
            let w = (st % width) as isize - W;
            if u == s && w.abs() == 1 {
                best = best.min(d);
                break;
            }
            let iu = lat.index_along(u, axis) as isize;
            for off in &offs {
                let Some(v) = step(m, u, off) else { continue };
                if !allowed(v) {
                    continue;
                }
                let raw = iu + off[axis];
                let dw = if raw >= nodes {
                    1
                } else if raw < 0 {
                    -1
                } else {
                    0
                };
                let nw = w + dw;
                if nw.abs() > W {
                    continue;
                }
                let t = state(v, nw);
                if done[t] {
                    continue;
                }
                let nd = d + edge_length(m, u, v, off);
                if nd < dist[t] {
                    dist[t] = nd;
                    heap.push(Entry { dist: nd, node: t });
                }
            }
        }
    }
    best
}

/// Upper bound on the length of any lattice edge.
pub(crate) fn max_edge_length<T: Real>(m: &DiscreteManifold<T>) -> T {
    let n = m.dim();
    let mut best = T::zero();
    for v in 0..m.len() {
        let g = m.metric().at(v);
        let dx: Vec<T> = (0..n).map(|a| m.lattice().axis(a).h).collect();
        // upper bound over all sign patterns: lambda_max * |dx|^2
        let lmax = linalg::sym_norm2(g, n).unwrap_or(T::zero());
        let e2 = dx.iter().fold(T::zero(), |s, x| s + *x * *x);
        best = best.max((lmax * e2).sqrt());
    }
    best
}
