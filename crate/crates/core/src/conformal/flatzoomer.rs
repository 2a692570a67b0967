use super::{conformal_metric, ConformalFactor};
use crate::error::{Error, Result};
use crate::geometry::{christoffel, covariant_derivative, riemann_with, tensor_norm};
use crate::grid::{DiscreteManifold, ScalarField};
use crate::scalar::Real;

/// `e^{-alpha u} * coeff * (1 + jet)^degree`, the shape of a flatzoomer bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatzoomerBound<T> {
    pub alpha: T,
    pub coeff: T,
    pub degree: T,
}

impl<T: Real> FlatzoomerBound<T> {
    pub fn eval(&self, u: T, jet: T) -> T {
        (-self.alpha * u).exp() * self.coeff * (T::one() + jet).powf(self.degree)
    }

    /// Bound for `sum Phi_i`: smallest rate, largest coefficient and
    /// degree, times the number of terms.
    pub fn sum(parts: &[Self]) -> Option<Self> {
        let first = parts.first()?;
        let mut out = *first;
        for p in &parts[1..] {
            out.alpha = out.alpha.min(p.alpha);
            out.coeff = out.coeff.max(p.coeff);
            out.degree = out.degree.max(p.degree);
        }
        out.coeff = out.coeff * T::of(parts.len());
        Some(out)
    }

    /// Bound for `Phi^{1/2}`.
    pub fn sqrt(&self) -> Self {
        let half = T::lit(0.5);
        Self { alpha: self.alpha * half, coeff: self.coeff.sqrt(), degree: self.degree * half }
    }
}

#[derive(Clone, Debug)]
pub struct FlatzoomerReport<T> {
    /// Number of covariant derivatives of `Riem`.
    pub k: usize,
    /// `|nabla^k Riem|` of `g[u]`, measured in `g[u]`.
    pub phi: ScalarField<T>,
    pub sup: T,
    /// Decay rate on the constant family, `k + 2`.
    pub alpha: T,
    /// Polynomial degree of the bound on the constant family.
    pub poly_degree: usize,
}

impl<T: Real> FlatzoomerReport<T> {
    /// Bound valid along `u + c` for constant `c >= 0` from this report.
    pub fn constant_family_bound(&self) -> FlatzoomerBound<T> {
        FlatzoomerBound { alpha: self.alpha, coeff: self.sup, degree: T::of(self.poly_degree) }
    }
}

/// Largest `k` for which `k + 2` derivative layers fit on the grid
/// (capped at 2).
pub fn max_supported_k<T: Real>(m: &DiscreteManifold<T>) -> usize {
    let nodes = m.lattice().axes().iter().map(|a| a.nodes).min().unwrap_or(0);
    if nodes < 5 {
        return 0;
    }
    ((nodes - 3) / 2).saturating_sub(1).min(2)
}

pub fn flatzoomer_phi<T: Real>(m: &DiscreteManifold<T>, u: &ConformalFactor<T>, k: usize) -> Result<FlatzoomerReport<T>> {
    let max = max_supported_k(m);
    if k > max {
        return Err(Error::DerivativeOrder { requested: k, max });
    }
    let mu = conformal_metric(m, u)?;
    let conn = christoffel(&mu)?;
    let mut t = riemann_with(&mu, &conn).riem;
    if k > 0 {
        t = covariant_derivative(&mu, &conn, &t, k)?;
    }
    let phi = tensor_norm(&mu, &t)?;
    let sup = phi.sup_abs();
    Ok(FlatzoomerReport { k, phi, sup, alpha: T::of(k + 2), poly_degree: 0 })
}

#[derive(Clone, Debug)]
pub struct FlatzoomerSweep<T> {
    pub k: usize,
    /// `(c, sup Phi(u + c))`.
    pub rows: Vec<(T, T)>,
    /// Least-squares slope of `ln sup Phi` against `c`; `None` when some
    /// value vanishes or fewer than two shifts were given.
    pub fitted_exponent: Option<T>,
}

/// Evaluates `Phi` along `u + c` for each shift and fits the decay rate.
pub fn flatzoomer_sweep<T: Real>(
    m: &DiscreteManifold<T>,
    u: &ConformalFactor<T>,
    shifts: &[T],
    k: usize,
) -> Result<FlatzoomerSweep<T>> {
    let mut rows = Vec::with_capacity(shifts.len());
    for &c in shifts {
        let r = flatzoomer_phi(m, &u.shifted(c), k)?;
        rows.push((c, r.sup));
    }
    let fitted_exponent = log_slope(&rows);
    Ok(FlatzoomerSweep { k, rows, fitted_exponent })
}

fn log_slope<T: Real>(rows: &[(T, T)]) -> Option<T> {
    if rows.len() < 2 || rows.iter().any(|(_, p)| !(*p > T::zero())) {
        return None;
    }
    let n = T::of(rows.len());
    let mx = rows.iter().map(|r| r.0).sum::<T>() / n;
    let my = rows.iter().map(|r| r.1.ln()).sum::<T>() / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, y) in rows {
        sxy = sxy + (*x - mx) * (y.ln() - my);
        sxx = sxx + (*x - mx) * (*x - mx);
    }
    if sxx == T::zero() {
        return None;
    }
    Some(sxy / sxx)
}

/// Pointwise sum of functionals.
pub fn compose_sum<T: Real>(parts: &[&ScalarField<T>]) -> Result<ScalarField<T>> {
    let len = parts.first().map(|p| p.len()).unwrap_or(0);
    if parts.iter().any(|p| p.len() != len) {
        return Err(Error::Shape("composed fields differ in length".into()));
    }
    Ok(ScalarField((0..len).map(|v| parts.iter().fold(T::zero(), |s, p| s + p[v])).collect()))
}

/// Pointwise square root of a nonnegative functional.
pub fn compose_sqrt<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    f.map(|x| x.max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_box_manifold, ManifoldSpec};

    #[test]
    fn flat_torus_phi_vanishes() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::flat_torus(7)).unwrap();
        let r = flatzoomer_phi(&m, &ConformalFactor::constant(m.len(), 0.0), 0).unwrap();
        assert_eq!(r.sup, 0.0);
    }

    #[test]
    fn order_too_large() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::flat_torus(6)).unwrap();
        let e = flatzoomer_phi(&m, &ConformalFactor::constant(m.len(), 0.0), 2).unwrap_err();
        assert!(matches!(e, Error::DerivativeOrder { requested: 2, max: 0 }));
    }

    #[test]
    fn slope_of_exact_exponential() {
        let rows: Vec<(f64, f64)> = [0.0, 1.0, 2.0].iter().map(|&c| (c, 3.0 * (-2.5f64 * c).exp())).collect();
        assert!((log_slope(&rows).unwrap() + 2.5).abs() < 1e-12);
        assert!(log_slope(&[(0.0, 1.0), (1.0, 0.0)]).is_none());
    }
}
