use super::operators::{OperatorPair, Problem};
use super::solver::{lemma_bound, solve_principal, EigenSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::geometry::fd;
use crate::grid::{metric_ball, DiscreteManifold, MetricField};
use crate::scalar::{max_of, min_of, sup_abs, Real};

/// Relative slack for discretisation error in the eigenvalue bounds.
pub const BOUND_SLACK: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct EigenBoundsReport<T> {
    pub problem: Problem,
    pub lambda: T,
    /// Right-hand side of `|lambda| <= bound`.
    pub bound: T,
    /// `bound - |lambda|` (negative means the raw bound failed).
    pub margin: T,
    pub passes: bool,
    pub r_max: T,
    pub h_max: T,
    pub volume: T,
    pub boundary_volume: T,
}

/// `|lambda_closed| <= |R|_max`,
/// `|lambda_0| <= |R|_max vol/vol_bdry + 2(n-1)|h|_max`,
/// `|lambda_1| <= |R|_max + 2(n-1)|h|_max vol_bdry/vol`.
pub fn eigen_bounds_check<T: Real>(ops: &OperatorPair<T>, sol: &EigenSolution<T>) -> EigenBoundsReport<T> {
    let bound = lemma_bound(ops, sol.problem);
    let slack = T::lit(1.0 + BOUND_SLACK);
    let lam = sol.lambda.abs();
    EigenBoundsReport {
        problem: sol.problem,
        lambda: sol.lambda,
        bound,
        margin: bound - lam,
        passes: lam <= slack * bound + T::lit(1e-10),
        r_max: ops.scalar.sup_abs(),
        h_max: ops.boundary_data.sup_mean(),
        volume: ops.volume(),
        boundary_volume: ops.boundary_volume(),
    }
}

/// `inf_K u / sup_K u`.
pub fn harnack_ratio<T: Real>(u: &[T], nodes: &[usize]) -> Result<T> {
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("Harnack set is empty".into()));
    }
    let lo = min_of(nodes.iter().map(|&v| u[v]));
    let hi = max_of(nodes.iter().map(|&v| u[v]));
    if !(lo > T::zero()) {
        return Err(Error::NonPositive { node: nodes[0], value: lo.to_f() });
    }
    Ok(lo / hi)
}

#[derive(Clone, Debug)]
pub struct HarnackReport<T> {
    pub radius: T,
    pub nodes: usize,
    pub ratio: T,
    pub perturbed_ratio: T,
    /// `|perturbed - ratio| / ratio`.
    pub drift: T,
    /// Measured `C^2` norm of the metric perturbation.
    pub perturbation_c2: T,
}

/// `sum_{l <= 2} sup |d^l f|` over components and coordinate directions.
pub fn c2_norm<T: Real>(m: &DiscreteManifold<T>, data: &[T], ncomp: usize) -> T {
    let lat = m.lattice();
    let n = m.dim();
    let mut s0 = sup_abs(data.iter().copied());
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    for a in 0..n {
        s1 = s1.max(sup_abs(fd::partial(lat, data, ncomp, a)));
        for b in a..n {
            s2 = s2.max(sup_abs(fd::second(lat, data, ncomp, a, b)));
        }
    }
    s0 = s0 + s1 + s2;
    s0
}

/// Harnack ratio on the ball of `radius` about the basepoint, and its
/// change under the metric perturbation `g -> (1 + eps psi) g` with
/// `psi = sin(2 pi t_0)` scaled so that the perturbation has `C^2` norm
/// `eps`.
pub fn harnack_stability<T: Real>(
    m: &DiscreteManifold<T>,
    sol: &EigenSolution<T>,
    radius: T,
    eps: T,
    opts: &SolverOptions,
) -> Result<HarnackReport<T>> {
    let ball = metric_ball(m, m.basepoint(), radius);
    let ratio = harnack_ratio(&sol.u, &ball)?;
    let lat = m.lattice();
    let ax = lat.axis(0);
    let (lo, len) = (ax.lo(), ax.length());
    let tau = T::TAU();
    let psi: Vec<T> = (0..m.len()).map(|v| (tau * (lat.coords(v)[0] - lo) / len).sin()).collect();
    let nn = m.dim() * m.dim();
    let shape: Vec<T> = (0..m.len()).flat_map(|v| m.metric().at(v).iter().map(move |g| *g)).collect();
    let unit: Vec<T> = (0..m.len() * nn).map(|i| psi[i / nn] * shape[i]).collect();
    let k = eps / c2_norm(m, &unit, nn);
    let delta: Vec<T> = unit.iter().map(|x| *x * k).collect();
    let perturbation_c2 = c2_norm(m, &delta, nn);
    let data: Vec<T> = shape.iter().zip(&delta).map(|(g, d)| *g + *d).collect();
    let pm = m.with_metric(MetricField::from_vec(m.dim(), data)?)?;
    let psol = solve_principal(&pm, sol.problem, opts)?;
    let perturbed_ratio = harnack_ratio(&psol.u, &ball)?;
    Ok(HarnackReport {
        radius,
        nodes: ball.len(),
        ratio,
        perturbed_ratio,
        drift: (perturbed_ratio - ratio).abs() / ratio,
        perturbation_c2,
    })
}
