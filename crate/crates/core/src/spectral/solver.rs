use super::operators::{assemble, OperatorPair, Problem};
use crate::error::{Error, Result};
use crate::grid::{DiscreteManifold, ScalarField};
use crate::scalar::{sup_abs, Real};
use crate::sparse::{norm2, pcg_shifted, CgFailure, CsrMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative eigen-residual target.
    pub tol: f64,
    /// Outer inverse-iteration steps.
    pub max_iter: usize,
    /// Fixed shift; by default a lower bound derived from `|R|` and `|h|`.
    pub shift: Option<f64>,
    pub cg_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 2000, shift: None, cg_max_iter: 50_000 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSolution<T> {
    pub problem: Problem,
    pub lambda: T,
    /// Positive eigenfunction with `u(basepoint) = 1`.
    pub u: ScalarField<T>,
    /// Relative residual of the interior equations.
    pub pde_residual: T,
    /// Relative residual of the boundary equations.
    pub boundary_residual: T,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub shift: T,
}

pub fn solve_principal<T: Real>(m: &DiscreteManifold<T>, p: Problem, opts: &SolverOptions) -> Result<EigenSolution<T>> {
    let ops = assemble(m)?;
    solve_principal_with(m, &ops, p, opts)
}

/// The lower bound `|lambda| <= bound` used for shifts and checks.
pub(crate) fn lemma_bound<T: Real>(ops: &OperatorPair<T>, p: Problem) -> T {
    let r = ops.scalar.sup_abs();
    let h = sup_abs(ops.boundary_data.faces.iter().flat_map(|f| f.mean.iter().copied()));
    let k = T::of(2 * (ops.n - 1));
    match p {
        Problem::Closed => r,
        Problem::S0 => r * ops.volume() / ops.boundary_volume() + k * h,
        Problem::S1 => r + k * h * ops.boundary_volume() / ops.volume(),
    }
}

pub fn solve_principal_with<T: Real>(
    m: &DiscreteManifold<T>,
    ops: &OperatorPair<T>,
    p: Problem,
    opts: &SolverOptions,
) -> Result<EigenSolution<T>> {
    match p {
        Problem::Closed if m.has_boundary() => {
            return Err(Error::InvalidParameter("closed problem posed on a manifold with boundary".into()))
        }
        Problem::S0 | Problem::S1 if !m.has_boundary() => return Err(Error::EmptyBoundary),
        _ => {}
    }
    let a = ops.quadratic();
    let b = ops.weights(p).to_vec();
    let mut sigma = match opts.shift {
        Some(s) => T::lit(s),
        None => -(T::lit(1.5) * lemma_bound(ops, p) + T::one()),
    };
    let mut history = Vec::new();
    for _attempt in 0..40 {
        match inverse_iteration(&a, &b, sigma, opts, &mut history) {
            Ok((x, iters)) => return finish(m, p, &a, &b, x, iters, history, sigma),
            Err(Shift::TooHigh) => {
                sigma = sigma + sigma - T::one();
            }
            Err(Shift::Fail(e)) => return Err(e),
        }
    }
    Err(Error::Indefinite { shift: sigma.to_f() })
}

enum Shift {
    TooHigh,
    Fail(Error),
}

fn b_norm<T: Real>(b: &[T], x: &[T]) -> T {
    x.iter().zip(b).fold(T::zero(), |s, (x, w)| s + *w * *x * *x).sqrt()
}

/// Residual `|A x - rho B x| / (|A|_inf |x|)`.
fn residual<T: Real>(a: &CsrMatrix<T>, b: &[T], x: &[T], rho: T, scale: T) -> (Vec<T>, T) {
    let mut r = a.matvec(x);
    for i in 0..r.len() {
        r[i] = r[i] - rho * b[i] * x[i];
    }
    let v = norm2(&r) / (scale * norm2(x));
    (r, v)
}

fn inverse_iteration<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    sigma: T,
    opts: &SolverOptions,
    history: &mut Vec<f64>,
) -> std::result::Result<(Vec<T>, usize), Shift> {
    let n = a.dim();
    let scale = a.norm_inf().max(T::min_positive_value());
    let cg_tol = T::lit(1e-13).max(T::epsilon() * T::lit(10.0));
    let tol = T::lit(opts.tol).max(T::epsilon() * T::lit(100.0));
    let mut x = vec![T::one(); n];
    let nb = b_norm(b, &x);
    if !(nb > T::zero()) {
        return Err(Shift::Fail(Error::ZeroDenominator));
    }
    x.iter_mut().for_each(|v| *v = *v / nb);
    let mut rho = a.quad(&x);
    for it in 1..=opts.max_iter {
        let rhs: Vec<T> = x.iter().zip(b).map(|(x, w)| *x * *w).collect();
        let guess: Vec<T> = if rho > sigma { x.iter().map(|v| *v / (rho - sigma)).collect() } else { x.clone() };
        let y = match pcg_shifted(a, b, sigma, &rhs, &guess, cg_tol, opts.cg_max_iter) {
            Ok((y, _)) => y,
            Err(CgFailure::Indefinite) => return Err(Shift::TooHigh),
            Err(CgFailure::MaxIter) => {
                return Err(Shift::Fail(Error::NonConvergence {
                    iterations: it,
                    last: history.last().copied().unwrap_or(f64::NAN),
                    history: history.clone(),
                }))
            }
        };
        let ny = b_norm(b, &y);
        if !(ny > T::zero()) || !ny.is_finite() {
            return Err(Shift::Fail(Error::NonFinite { node: 0 }));
        }
        x = y.into_iter().map(|v| v / ny).collect();
        rho = a.quad(&x);
        if rho < sigma {
            return Err(Shift::TooHigh);
        }
        let (_, res) = residual(a, b, &x, rho, scale);
        history.push(res.to_f());
        if res <= tol {
            return Ok((x, it));
        }
    }
    Err(Shift::Fail(Error::NonConvergence {
        iterations: opts.max_iter,
        last: history.last().copied().unwrap_or(f64::NAN),
        history: history.clone(),
    }))
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    m: &DiscreteManifold<T>,
    p: Problem,
    a: &CsrMatrix<T>,
    b: &[T],
    mut x: Vec<T>,
    iterations: usize,
    history: Vec<f64>,
    sigma: T,
) -> Result<EigenSolution<T>> {
    if x.iter().copied().sum::<T>() < T::zero() {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let nonpositive = x.iter().filter(|v| !(**v > T::zero())).count();
    if nonpositive > 0 {
        return Err(Error::NonPrincipal { nonpositive, history });
    }
    let base = x[m.basepoint()];
    let u: Vec<T> = x.iter().map(|v| *v / base).collect();
    let lambda = a.quad(&u) / u.iter().zip(b).fold(T::zero(), |s, (x, w)| s + *w * *x * *x);
    let scale = a.norm_inf().max(T::min_positive_value());
    let (r, _) = residual(a, b, &u, lambda, scale);
    let denom = scale * norm2(&u);
    let lat = m.lattice();
    let split = |bdry: bool| {
        let s: T = (0..r.len()).filter(|&v| lat.is_boundary(v) == bdry).map(|v| r[v] * r[v]).sum();
        s.sqrt() / denom
    };
    Ok(EigenSolution {
        problem: p,
        lambda,
        u: ScalarField(u),
        pde_residual: split(false),
        boundary_residual: split(true),
        iterations,
        history,
        shift: sigma,
    })
}
