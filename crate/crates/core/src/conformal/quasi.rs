use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{conformal_metric, ConformalFactor};
use crate::error::{Error, Result};
use crate::geometry::{christoffel, gradient_norm_sq, riemann_with, tensor_norm};
use crate::grid::{distances_from, max_edge_length, shortest_path_tree, DiscreteManifold};
use crate::linalg;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct ConvexityOptions {
    /// Ball centres: the basepoint plus `centers - 1` random nodes.
    pub centers: usize,
    /// Path sources sampled per centre.
    pub sources: usize,
    pub seed: u64,
    /// Relative slack on `1/conv_est <= Psi`.
    pub slack: f64,
}

impl Default for ConvexityOptions {
    fn default() -> Self {
        Self { centers: 4, sources: 8, seed: 0x5eed, slack: 0.0 }
    }
}

#[derive(Clone, Debug)]
pub struct QuasiFlatzoomerData<T> {
    pub phi0: T,
    pub phi1: T,
    pub phi2: T,
    pub psi: T,
    /// Christoffel constant with `|Gamma[u]| <= A (1 + |du|_g)`.
    pub a_const: T,
    /// Norm comparison constant `C |v|_eucl >= |v|_g >= |v|_eucl / C`.
    pub c_const: T,
    /// `4 n^2 A C^3`.
    pub h_const: T,
    /// Constant threshold with `e^{u1} * (chart extent) = 1`.
    pub u1: T,
    /// Empirical convexity radius of `g[u]` on the metric graph.
    pub conv_est: T,
    /// Whether a non-convex ball was actually observed; otherwise
    /// `conv_est` is only the largest radius tested.
    pub witnessed: bool,
    /// `None` when the check was skipped.
    pub bound_holds: Option<bool>,
    pub skipped: bool,
}

impl<T: Real> QuasiFlatzoomerData<T> {
    pub fn summary(&self) -> String {
        format!(
            "phi0 = {:?}\nphi1 = {:?}\nphi2 = {:?}\npsi = {:?}\nA = {:?}\nC = {:?}\nH = {:?}\nu1 = {:?}\nconv_est = {:?}\nwitnessed = {}\ninverse_conv_est = {:?}\nbound = {}\n",
            self.phi0.to_f(),
            self.phi1.to_f(),
            self.phi2.to_f(),
            self.psi.to_f(),
            self.a_const.to_f(),
            self.c_const.to_f(),
            self.h_const.to_f(),
            self.u1.to_f(),
            self.conv_est.to_f(),
            self.witnessed,
            (T::one() / self.conv_est).to_f(),
            match self.bound_holds {
                None => "skipped",
                Some(true) => "holds",
                Some(false) => "violated",
            }
        )
    }
}

pub fn quasi_flatzoomer_psi<T: Real>(
    m: &DiscreteManifold<T>,
    u: &ConformalFactor<T>,
    opts: &ConvexityOptions,
) -> Result<QuasiFlatzoomerData<T>> {
    let n = m.dim();
    let conn = christoffel(m)?;
    let mut c_const = T::zero();
    let mut gmax = T::zero();
    for v in 0..m.len() {
        let g = m.metric().at(v);
        let (vals, _) = linalg::sym_eigen(g, n).ok_or(Error::Singular { node: v })?;
        let (lo, hi) = (vals[0], vals[n - 1]);
        if !(lo > T::zero()) {
            return Err(Error::NotPositiveDefinite { node: v, coords: Vec::new() });
        }
        c_const = c_const.max(hi.sqrt()).max(T::one() / lo.sqrt());
        gmax = gmax.max(crate::scalar::sup_abs(g.iter().copied()));
    }
    let a_const = conn.sup_abs().max((T::lit(2.0) + gmax) * c_const);
    let h_const = T::lit(4.0) * T::of(n * n) * a_const * c_const.powi(3);

    let lat = m.lattice();
    let extent = lat.axes().iter().map(|a| a.h * T::of(a.steps())).fold(T::infinity(), |x, y| x.min(y));
    let u1 = -extent.ln();
    // unit balls of g[u1] must span a few cells on every axis
    let skipped = lat.axes().iter().any(|a| a.steps() < 4);

    let mu = conformal_metric(m, u)?;
    let riem = riemann_with(&mu, &christoffel(&mu)?).riem;
    let phi0 = T::lit(2.0) / T::PI() * tensor_norm(&mu, &riem)?.sup_abs().sqrt();
    let du2 = gradient_norm_sq(m, &u.log)?;
    let mut phi1 = T::zero();
    let mut phi2 = T::zero();
    for v in 0..m.len() {
        let e = (-u.log[v]).exp();
        phi1 = phi1.max(e * h_const * (T::one() + du2[v].max(T::zero()).sqrt()));
        phi2 = phi2.max(T::lit(4.0) * e * u1.exp());
    }
    let psi = phi0 + phi1 + phi2;

    let (conv_est, witnessed) = convexity_radius_estimate(&mu, opts);
    let bound_holds = if skipped {
        None
    } else {
        Some(T::one() / conv_est <= psi * (T::one() + T::lit(opts.slack)))
    };
    Ok(QuasiFlatzoomerData {
        phi0,
        phi1,
        phi2,
        psi,
        a_const,
        c_const,
        h_const,
        u1,
        conv_est,
        witnessed,
        bound_holds,
        skipped,
    })
}

/// Smallest sampled radius at which a geodesic ball fails the
/// midpoint-in-ball test.
///
/// For a centre `c` and a shortest path `p -> q`, the ball of radius just
/// above `max(d(c,p), d(c,q))` is not convex if the path midpoint lies
/// farther than that radius (plus one edge length). Returns the estimate
/// and whether any failure was observed; without one, the largest tested
/// radius is returned.
pub fn convexity_radius_estimate<T: Real>(m: &DiscreteManifold<T>, opts: &ConvexityOptions) -> (T, bool) {
    let all: Vec<usize> = (0..m.len()).collect();
    convexity_radius_among(m, &all, opts)
}

/// As [`convexity_radius_estimate`] with ball centres drawn from
/// `candidates` (the basepoint first, if it is one).
pub fn convexity_radius_among<T: Real>(m: &DiscreteManifold<T>, candidates: &[usize], opts: &ConvexityOptions) -> (T, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let all: Vec<usize> = (0..m.len()).collect();
    let mut centers = Vec::new();
    let mut pool: Vec<usize> = candidates.to_vec();
    if let Some(i) = pool.iter().position(|&v| v == m.basepoint()) {
        centers.push(pool.remove(i));
    }
    let extra = opts.centers.saturating_sub(centers.len());
    centers.extend(pool.choose_multiple(&mut rng, extra).copied());
    let tol = max_edge_length(m);
    let mut best = T::infinity();
    let mut reach = T::zero();
    for &c in &centers {
        let dc = distances_from(m, c);
        let far = crate::scalar::max_of(dc.iter().copied().filter(|d| d.is_finite()));
        reach = reach.max(far);
        let near: Vec<usize> = all.iter().copied().filter(|&v| dc[v] < far * T::lit(0.5)).collect();
        let sources: Vec<usize> = near.choose_multiple(&mut rng, opts.sources).copied().collect();
        for p in sources {
            let tree = shortest_path_tree(m, p);
            for q in 0..m.len() {
                let r = dc[p].max(dc[q]);
                if !(r < best) || !tree.dist[q].is_finite() {
                    continue;
                }
                let mid = tree.midpoint(q);
                if dc[mid] > r + tol {
                    best = r;
                }
            }
        }
    }
    if best.is_finite() {
        (best, true)
    } else {
        (reach, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_box_manifold, ManifoldSpec};

    #[test]
    fn flat_torus_constants() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::flat_torus(8)).unwrap();
        let q = quasi_flatzoomer_psi(&m, &ConformalFactor::constant(m.len(), 0.0), &ConvexityOptions::default()).unwrap();
        assert_eq!(q.phi0, 0.0);
        assert_eq!(q.c_const, 1.0);
        assert_eq!(q.a_const, 3.0);
        assert_eq!(q.h_const, 108.0);
        assert!((q.psi - q.phi1 - q.phi2).abs() < 1e-12);
        assert_eq!(q.bound_holds, Some(true));
    }
}
