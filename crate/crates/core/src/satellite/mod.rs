//! Conformal satellites `g~ = u^{4/(n-2)} g` of principal eigenfunctions,
//! their curvature identities, and bounded-geometry reports.

mod bounded;

pub use bounded::{bounded_geometry_report, BoundedGeometryReport, Verdict};

use crate::conformal::{conformal_metric, ConformalFactor};
use crate::error::Result;
use crate::geometry::{boundary_geometry, scalar_curvature, BoundaryData};
use crate::grid::{build_box_manifold, DiscreteManifold, ManifoldSpec, ScalarField};
use crate::scalar::{sup_abs, Real};
use crate::spectral::{solve_principal, EigenSolution, Problem, SolverOptions};

#[derive(Clone, Debug)]
pub struct SatelliteManifold<T> {
    pub base: DiscreteManifold<T>,
    pub problem: Problem,
    pub eigen: EigenSolution<T>,
    /// Log-factor with `g~ = e^{2 factor} g`.
    pub factor: ConformalFactor<T>,
    pub manifold: DiscreteManifold<T>,
    /// Scalar curvature of `g~`.
    pub scalar: ScalarField<T>,
    /// Boundary geometry of `g~` (empty when closed).
    pub boundary: BoundaryData<T>,
}

pub fn make_satellite<T: Real>(m: &DiscreteManifold<T>, p: Problem, opts: &SolverOptions) -> Result<SatelliteManifold<T>> {
    let eigen = solve_principal(m, p, opts)?;
    satellite_from(m, eigen)
}

/// Satellite built from an already solved eigenpair.
pub fn satellite_from<T: Real>(m: &DiscreteManifold<T>, eigen: EigenSolution<T>) -> Result<SatelliteManifold<T>> {
    let factor = ConformalFactor::from_positive(&eigen.u, m.dim())?;
    let manifold = conformal_metric(m, &factor)?;
    let scalar = scalar_curvature(&manifold)?;
    let boundary = boundary_geometry(&manifold)?;
    Ok(SatelliteManifold { base: m.clone(), problem: eigen.problem, eigen, factor, manifold, scalar, boundary })
}

impl<T: Real> SatelliteManifold<T> {
    /// Expected scalar curvature of `g~` at every node.
    pub fn expected_scalar(&self) -> ScalarField<T> {
        let n = self.base.dim();
        let lam = self.eigen.lambda;
        match self.problem {
            Problem::S0 => ScalarField::constant(self.base.len(), T::zero()),
            _ => {
                let e = -T::of(4) / T::of(n - 2);
                self.eigen.u.map(|u| lam * u.powf(e))
            }
        }
    }

    /// Expected mean curvature of `g~` per boundary face node, following
    /// `boundary.faces`. For s = 0 it is `-lambda u^{-2/(n-2)} / (2(n-1))`
    /// (inward normal, eigenvalue of the weak form).
    pub fn expected_mean(&self) -> Vec<Vec<T>> {
        let n = self.base.dim();
        let lam = self.eigen.lambda;
        let e = -T::of(2) / T::of(n - 2);
        let k = T::of(2 * (n - 1));
        self.boundary
            .faces
            .iter()
            .map(|f| {
                f.nodes
                    .iter()
                    .map(|&v| match self.problem {
                        Problem::S0 => -lam * self.eigen.u[v].powf(e) / k,
                        _ => T::zero(),
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct IdentityReport<T> {
    pub problem: Problem,
    pub lambda: T,
    /// `sup |R~ - expected|`.
    pub scalar_residual: T,
    /// `sup |h~ - expected|`; `None` without boundary.
    pub mean_residual: Option<T>,
    /// Largest grid spacing.
    pub h: T,
    /// `sign R~ = sign lambda` (for s = 0: `sign h~ = -sign lambda` on the
    /// boundary) when `|lambda|` exceeds the residual; `None` otherwise.
    pub sign_law: Option<bool>,
}

pub fn verify_identities<T: Real>(s: &SatelliteManifold<T>) -> IdentityReport<T> {
    let expected = s.expected_scalar();
    let scalar_residual = sup_abs((0..s.scalar.len()).map(|v| s.scalar[v] - expected[v]));
    let mean_residual = if s.boundary.is_empty() {
        None
    } else {
        let exp = s.expected_mean();
        Some(sup_abs(
            s.boundary.faces.iter().zip(&exp).flat_map(|(f, e)| f.mean.iter().zip(e).map(|(a, b)| *a - *b)),
        ))
    };
    let lam = s.eigen.lambda;
    // an eigenvalue at round-off level has no sign
    let tol = T::loose_eps();
    let sign_law = match (s.problem, mean_residual) {
        // scalar-flat: the sign shows up in the boundary mean curvature,
        // sign h~ = -sign lambda
        (Problem::S0, Some(res)) => {
            if lam.abs() > res.max(tol) {
                Some(
                    s.boundary
                        .faces
                        .iter()
                        .flat_map(|f| f.mean.iter())
                        .all(|h| *h != T::zero() && (*h > T::zero()) == (lam < T::zero())),
                )
            } else {
                None
            }
        }
        (Problem::S0, None) => None,
        _ if lam.abs() > scalar_residual.max(tol) => {
            Some(s.scalar.iter().all(|r| *r != T::zero() && (*r > T::zero()) == (lam > T::zero())))
        }
        _ => None,
    };
    IdentityReport {
        problem: s.problem,
        lambda: lam,
        scalar_residual,
        mean_residual,
        h: s.base.lattice().max_spacing(),
        sign_law,
    }
}

/// Identity residuals at `h` and `h/2`.
#[derive(Clone, Debug)]
pub struct IdentityConvergence<T> {
    pub coarse: IdentityReport<T>,
    pub fine: IdentityReport<T>,
    /// `log2(coarse/fine)` of the scalar residual (`None` when both are
    /// at round-off level).
    pub scalar_order: Option<T>,
    pub mean_order: Option<T>,
    /// Every measured order is at least 1.
    pub passes: bool,
}

/// Residuals below this are treated as exact.
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

fn order<T: Real>(a: T, b: T) -> Option<T> {
    let floor = T::lit(ROUNDOFF_FLOOR);
    if a <= floor && b <= floor {
        None
    } else {
        Some((a / b).log2())
    }
}

pub fn identity_convergence<T: Real>(spec: &ManifoldSpec, p: Problem, opts: &SolverOptions) -> Result<IdentityConvergence<T>> {
    let coarse_m = build_box_manifold::<T>(spec)?;
    let fine_m = build_box_manifold::<T>(&spec.clone().refined())?;
    let coarse = verify_identities(&make_satellite(&coarse_m, p, opts)?);
    let fine = verify_identities(&make_satellite(&fine_m, p, opts)?);
    let scalar_order = order(coarse.scalar_residual, fine.scalar_residual);
    let mean_order = match (coarse.mean_residual, fine.mean_residual) {
        (Some(a), Some(b)) => order(a, b),
        _ => None,
    };
    let passes = [scalar_order, mean_order].iter().flatten().all(|p| *p >= T::one());
    Ok(IdentityConvergence { coarse, fine, scalar_order, mean_order, passes })
}
