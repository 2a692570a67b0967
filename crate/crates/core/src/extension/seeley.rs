use crate::error::{Error, Result};
use crate::grid::{Axis, Lattice};
use crate::linalg;
use crate::scalar::Real;

/// Largest supported order.
pub const MAX_ORDER: usize = 4;

/// Finite-order reflection `(Ef)(-t) = sum_k a_k f(b_k t)`, matching
/// derivatives of order `<= m` across `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeeleyScheme<T> {
    b: Vec<T>,
    a: Vec<T>,
    residual: T,
}

impl<T: Real> SeeleyScheme<T> {
    /// Solves `sum_k a_k (-b_k)^j = 1`, `j = 0..=m`, for the given nodes.
    pub fn new(b: Vec<T>) -> Result<Self> {
        if b.is_empty() || b.len() > MAX_ORDER + 1 {
            return Err(Error::Scheme(format!("order {} outside 0..={MAX_ORDER}", b.len() as isize - 1)));
        }
        if let Some(x) = b.iter().find(|x| !(**x > T::zero()) || !x.is_finite()) {
            return Err(Error::Scheme(format!("node {x} is not positive")));
        }
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                if b[i] == b[j] {
                    return Err(Error::Scheme(format!("duplicate node {}", b[i])));
                }
            }
        }
        let k = b.len();
        let mut v = vec![T::zero(); k * k];
        for j in 0..k {
            for (c, bc) in b.iter().enumerate() {
                v[j * k + c] = (-*bc).powi(j as i32);
            }
        }
        let ones = vec![T::one(); k];
        let a = linalg::solve(&v, &ones, k).ok_or_else(|| Error::Scheme("singular Vandermonde system".into()))?;
        let residual = crate::scalar::sup_abs(linalg::matvec(&v, k, &a).into_iter().map(|x| x - T::one()));
        if !(residual <= T::loose_eps()) {
            return Err(Error::Scheme(format!("Vandermonde residual {:e}", residual.to_f())));
        }
        Ok(Self { b, a, residual })
    }

    /// Order `m` with `b_k = 2^k`.
    pub fn geometric(m: usize) -> Result<Self> {
        Self::new((0..=m.min(MAX_ORDER + 1)).map(|k| T::lit(2f64.powi(k as i32))).collect())
    }

    pub fn order(&self) -> usize {
        self.b.len() - 1
    }

    pub fn nodes(&self) -> &[T] {
        &self.b
    }

    pub fn coefficients(&self) -> &[T] {
        &self.a
    }

    pub fn residual(&self) -> T {
        self.residual
    }

    /// `sum |a_k|`, the amplification of the extension in sup norm.
    pub fn abs_sum(&self) -> T {
        self.a.iter().map(|x| x.abs()).sum()
    }

    /// Lower bound for `exp(E ln u)` when `b <= u <= sup`.
    pub fn beta(&self, b: T, sup: T) -> T {
        let s = self.abs_sum();
        let margin = s * (sup.ln().abs() - b.ln().abs()).max(T::zero());
        (-s * b.ln().abs() - margin).exp()
    }

    /// Value at `t = -j h` from samples `get(i) = f(i h)`, `i < len`.
    /// The flag reports a sample position clamped to the last node.
    pub(crate) fn eval(&self, get: &impl Fn(usize) -> T, len: usize, j: usize) -> (T, bool) {
        let mut clamped = false;
        let mut s = T::zero();
        for (a, b) in self.a.iter().zip(&self.b) {
            let (v, c) = sample(get, len, *b * T::of(j));
            clamped |= c;
            s = s + *a * v;
        }
        (s, clamped)
    }
}

/// Sample at a real position: exact on nodes, 5-point Lagrange between
/// them, clamped beyond the last node.
fn sample<T: Real>(get: &impl Fn(usize) -> T, len: usize, pos: T) -> (T, bool) {
    let top = T::of(len - 1);
    if pos > top {
        return (get(len - 1), true);
    }
    let r = pos.round();
    if (pos - r).abs() <= T::epsilon() * T::lit(16.0) * pos.max(T::one()) {
        return (get(r.to_usize().unwrap_or(0)), false);
    }
    let w = len.min(5);
    let f = pos.floor().to_usize().unwrap_or(0);
    let start = f.saturating_sub(2).min(len - w);
    let mut s = T::zero();
    for i in start..start + w {
        let mut l = T::one();
        for k in start..start + w {
            if k != i {
                l = l * (pos - T::of(k)) / (T::of(i) - T::of(k));
            }
        }
        s = s + l * get(i);
    }
    (s, false)
}

/// Extension values on `t = -h, -2h, ..., -depth h`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineExtension<T> {
    pub values: Vec<T>,
    pub clamped: bool,
}

/// Extends samples `f(i h)`, `i = 0..len`, to `depth` nodes beyond `t = 0`.
pub fn seeley_extend<T: Real>(scheme: &SeeleyScheme<T>, samples: &[T], depth: usize) -> Result<LineExtension<T>> {
    if samples.is_empty() {
        return Err(Error::Shape("no samples to extend".into()));
    }
    let get = |i: usize| samples[i];
    let mut clamped = false;
    let values = (1..=depth)
        .map(|j| {
            let (v, c) = scheme.eval(&get, samples.len(), j);
            clamped |= c;
            v
        })
        .collect();
    Ok(LineExtension { values, clamped })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositiveExtension<T> {
    pub values: Vec<T>,
    /// Guaranteed lower bound for the extension.
    pub beta: T,
    pub clamped: bool,
}

/// `exp(E ln u)`; `lower` defaults to `inf u`.
pub fn positive_extend<T: Real>(
    scheme: &SeeleyScheme<T>,
    u: &[T],
    depth: usize,
    lower: Option<T>,
) -> Result<PositiveExtension<T>> {
    let logs = positive_logs(u)?;
    let inf = crate::scalar::min_of(u.iter().copied());
    let sup = crate::scalar::max_of(u.iter().copied());
    let b = lower.unwrap_or(inf);
    if !(b > T::zero()) || b > inf {
        return Err(Error::InvalidParameter(format!("lower bound {b} is not in (0, inf u = {inf}]")));
    }
    let ext = seeley_extend(scheme, &logs, depth)?;
    Ok(PositiveExtension {
        values: ext.values.into_iter().map(|x| x.exp()).collect(),
        beta: scheme.beta(b, sup),
        clamped: ext.clamped,
    })
}

pub(crate) fn positive_logs<T: Real>(u: &[T]) -> Result<Vec<T>> {
    u.iter()
        .enumerate()
        .map(|(v, &x)| {
            if x > T::zero() && x.is_finite() {
                Ok(x.ln())
            } else {
                Err(Error::NonPositive { node: v, value: x.to_f() })
            }
        })
        .collect()
}

/// Adds `layers[a] = (lo, hi)` nodes at the ends of every axis, extending a
/// node-major field with `ncomp` components axis by axis. Periodic axes
/// must have `(0, 0)`. Returns the new lattice, data and the clamp flag.
pub fn extend_lattice_field<T: Real>(
    lat: &Lattice<T>,
    data: &[T],
    ncomp: usize,
    scheme: &SeeleyScheme<T>,
    layers: &[(usize, usize)],
) -> Result<(Lattice<T>, Vec<T>, bool)> {
    if layers.len() != lat.dim() || data.len() != lat.len() * ncomp {
        return Err(Error::Shape("layer list or field does not match the lattice".into()));
    }
    let mut cur = lat.clone();
    let mut cur_data = data.to_vec();
    let mut clamped = false;
    for (a, &(lo, hi)) in layers.iter().enumerate() {
        if lo == 0 && hi == 0 {
            continue;
        }
        let old = cur.axis(a).clone();
        if old.periodic {
            return Err(Error::InvalidParameter(format!("axis {a} is periodic and cannot be extended")));
        }
        let len = old.nodes;
        let mut axes = cur.axes().to_vec();
        axes[a] = Axis { offset: old.offset - lo as isize, nodes: len + lo + hi, ..old };
        let next = Lattice::new(axes);
        let mut out = vec![T::zero(); next.len() * ncomp];
        for v in 0..next.len() {
            let mut idx = next.multi_index(v);
            if idx[a] < lo || idx[a] >= lo + len {
                continue;
            }
            idx[a] -= lo;
            let w = cur.node(&idx);
            out[v * ncomp..(v + 1) * ncomp].copy_from_slice(&cur_data[w * ncomp..(w + 1) * ncomp]);
        }
        let stride = next.stride(a);
        for start in (0..next.len()).filter(|&v| next.index_along(v, a) == 0) {
            for c in 0..ncomp {
                let at = |i: usize| (start + i * stride) * ncomp + c;
                let line: Vec<T> = (0..len).map(|i| out[at(lo + i)]).collect();
                let fwd = |i: usize| line[i];
                for j in 1..=lo {
                    let (x, f) = scheme.eval(&fwd, len, j);
                    clamped |= f;
                    out[at(lo - j)] = x;
                }
                let back = |i: usize| line[len - 1 - i];
                for j in 1..=hi {
                    let (x, f) = scheme.eval(&back, len, j);
                    clamped |= f;
                    out[at(lo + len - 1 + j)] = x;
                }
            }
        }
        cur = next;
        cur_data = out;
    }
    Ok((cur, cur_data, clamped))
}
