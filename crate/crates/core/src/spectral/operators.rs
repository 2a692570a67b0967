use crate::error::{Error, Result};
use crate::geometry::{boundary_geometry_with, christoffel, dirichlet_form, riemann_with, BoundaryData};
use crate::grid::{DiscreteManifold, ScalarField};
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Which principal eigenvalue problem is posed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    /// `L u = lambda u` on a manifold without boundary.
    Closed,
    /// `L u = 0` inside, boundary condition carries the eigenvalue.
    S0,
    /// `L u = lambda u` inside, `B u = 0` on the boundary.
    S1,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Closed => "closed",
            Problem::S0 => "s0",
            Problem::S1 => "s1",
        }
    }
}

impl std::str::FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Problem::Closed),
            "0" | "s0" => Ok(Problem::S0),
            "1" | "s1" => Ok(Problem::S1),
            _ => Err(Error::InvalidParameter(format!("unknown problem `{s}` (expected closed, s0 or s1)"))),
        }
    }
}

/// `a_n = 4(n-1)/(n-2)`.
pub fn a_n<T: Real>(n: usize) -> T {
    T::of(4 * (n - 1)) / T::of(n - 2)
}

/// `b_n = (n-2)/2`.
pub fn b_n<T: Real>(n: usize) -> T {
    T::of(n - 2) / T::lit(2.0)
}

/// Discretised conformal Laplacian and boundary operator.
///
/// The quadratic form `f^T Q f` with
/// `Q = a_n K + diag(R M) - a_n b_n diag(S h)` approximates
/// `a_n int |grad f|^2 + int R f^2 - 2(n-1) int_bdry h f^2`, with `h` the
/// mean curvature for the inward normal.
#[derive(Clone, Debug)]
pub struct OperatorPair<T> {
    pub n: usize,
    pub a_n: T,
    pub b_n: T,
    /// `a_n K + diag(R M)`, symmetric; `M^{-1}` times it is `L_g` at
    /// interior nodes.
    pub interior: CsrMatrix<T>,
    /// Rows of `B_g = d_nu + b_n h` at boundary nodes (zero rows inside).
    pub boundary: CsrMatrix<T>,
    pub mass: Vec<T>,
    /// Boundary area weight per node (zero inside).
    pub boundary_mass: Vec<T>,
    /// Area-weighted mean curvature per node (zero inside).
    pub boundary_h_mass: Vec<T>,
    pub scalar: ScalarField<T>,
    pub boundary_data: BoundaryData<T>,
}

impl<T: Real> OperatorPair<T> {
    /// Symmetric form `Q` of the Rayleigh numerator.
    pub fn quadratic(&self) -> CsrMatrix<T> {
        if self.boundary_h_mass.iter().all(|x| *x == T::zero()) {
            return self.interior.clone();
        }
        let k = self.a_n * self.b_n;
        let d: Vec<T> = self.boundary_h_mass.iter().map(|x| -k * *x).collect();
        self.interior.scaled_plus_diag(T::one(), &d)
    }

    /// Denominator weights of the Rayleigh quotient.
    pub fn weights(&self, p: Problem) -> &[T] {
        match p {
            Problem::S0 => &self.boundary_mass,
            _ => &self.mass,
        }
    }

    pub fn volume(&self) -> T {
        self.mass.iter().copied().sum()
    }

    pub fn boundary_volume(&self) -> T {
        self.boundary_mass.iter().copied().sum()
    }

    /// `L f` at every node (`M^{-1}` times the interior form).
    pub fn apply_l(&self, f: &[T]) -> Vec<T> {
        self.interior.matvec(f).into_iter().zip(&self.mass).map(|(x, m)| x / *m).collect()
    }
}

pub fn assemble<T: Real>(m: &DiscreteManifold<T>) -> Result<OperatorPair<T>> {
    let n = m.dim();
    if n < 3 {
        return Err(Error::Dimension(n));
    }
    let a: T = a_n(n);
    let b: T = b_n(n);
    // a_n b_n = 2(n-1): exact in binary for every n since the factors
    // cancel the (n-2)
    debug_assert!((a * b - T::of(2 * (n - 1))).abs() <= T::epsilon() * T::of(4 * n));
    let form = dirichlet_form(m)?;
    let conn = christoffel(m)?;
    let scalar = riemann_with(m, &conn).scalar;
    let d: Vec<T> = (0..m.len()).map(|v| scalar[v] * form.mass[v]).collect();
    let interior = form.stiffness.scaled_plus_diag(a, &d);
    let bd = boundary_geometry_with(m, &conn);
    let mut boundary_mass = vec![T::zero(); m.len()];
    let mut boundary_h_mass = vec![T::zero(); m.len()];
    let mut count = vec![0usize; m.len()];
    for f in &bd.faces {
        for (k, &v) in f.nodes.iter().enumerate() {
            boundary_mass[v] = boundary_mass[v] + f.area_weights[k];
            boundary_h_mass[v] = boundary_h_mass[v] + f.area_weights[k] * f.mean[k];
            count[v] += 1;
        }
    }
    let lat = m.lattice();
    let mut bb = TripletBuilder::new(m.len());
    for f in &bd.faces {
        for (k, &v) in f.nodes.iter().enumerate() {
            let w = T::one() / T::of(count[v]);
            for i in 0..n {
                let nu = f.normal[k * n + i];
                if nu == T::zero() {
                    continue;
                }
                for (node, c) in first_derivative_stencil(lat, v, i) {
                    bb.add(v, node, w * nu * c);
                }
            }
            bb.add(v, v, w * b * f.mean[k]);
        }
    }
    Ok(OperatorPair {
        n,
        a_n: a,
        b_n: b,
        interior,
        boundary: bb.build(),
        mass: form.mass,
        boundary_mass,
        boundary_h_mass,
        scalar,
        boundary_data: bd,
    })
}

/// Coefficients of the second-order first-derivative stencil along `a`.
fn first_derivative_stencil<T: Real>(lat: &crate::grid::Lattice<T>, v: usize, a: usize) -> Vec<(usize, T)> {
    let ax = lat.axis(a);
    let two_h = ax.h + ax.h;
    let i = lat.index_along(v, a);
    let at = |d: isize| lat.shift(v, a, d).expect("stencil inside lattice");
    if ax.periodic || (i > 0 && i + 1 < ax.nodes) {
        vec![(at(1), T::one() / two_h), (at(-1), -T::one() / two_h)]
    } else {
        let s: isize = if i == 0 { 1 } else { -1 };
        let sign = if i == 0 { T::one() } else { -T::one() };
        vec![
            (v, -sign * T::lit(3.0) / two_h),
            (at(s), sign * T::lit(4.0) / two_h),
            (at(2 * s), -sign / two_h),
        ]
    }
}

/// `Q^(s)(f)`: Rayleigh quotient of the closed, `s = 0` or `s = 1` problem.
pub fn rayleigh_quotient<T: Real>(ops: &OperatorPair<T>, f: &[T], p: Problem) -> Result<T> {
    let q = ops.quadratic();
    rayleigh_with(&q, ops.weights(p), f)
}

pub(crate) fn rayleigh_with<T: Real>(q: &CsrMatrix<T>, w: &[T], f: &[T]) -> Result<T> {
    let den = f.iter().zip(w).fold(T::zero(), |s, (x, w)| s + *w * *x * *x);
    if !(den > T::zero()) {
        return Err(Error::ZeroDenominator);
    }
    Ok(q.quad(f) / den)
}
