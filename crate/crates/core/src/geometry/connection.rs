use rayon::prelude::*;

use super::fd;
use crate::error::{Error, Result};
use crate::grid::DiscreteManifold;
use crate::linalg;
use crate::scalar::Real;

/// Christoffel symbols `Gamma^c_ab` together with the metric data they were
/// built from.
#[derive(Clone, Debug)]
pub struct ConnectionField<T> {
    pub dim: usize,
    /// `gamma[node][c][a][b]`.
    pub gamma: Vec<T>,
    /// `g^{ij}` per node.
    pub ginv: Vec<T>,
    /// `d_k g_ij` per node as `[k][i][j]`.
    pub dg: Vec<T>,
}

impl<T: Real> ConnectionField<T> {
    #[inline]
    pub fn at(&self, node: usize) -> &[T] {
        let s = self.dim.pow(3);
        &self.gamma[node * s..(node + 1) * s]
    }

    #[inline]
    pub fn get(&self, node: usize, c: usize, a: usize, b: usize) -> T {
        let n = self.dim;
        self.gamma[node * n * n * n + (c * n + a) * n + b]
    }

    #[inline]
    pub fn ginv_at(&self, node: usize) -> &[T] {
        let s = self.dim * self.dim;
        &self.ginv[node * s..(node + 1) * s]
    }

    #[inline]
    pub fn dg_at(&self, node: usize) -> &[T] {
        let s = self.dim.pow(3);
        &self.dg[node * s..(node + 1) * s]
    }

    /// Largest `|Gamma^c_ab - Gamma^c_ba|` (zero by construction).
    pub fn asymmetry(&self) -> T {
        let n = self.dim;
        let mut m = T::zero();
        for v in 0..self.gamma.len() / n.pow(3) {
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        m = m.max((self.get(v, c, a, b) - self.get(v, c, b, a)).abs());
                    }
                }
            }
        }
        m
    }

    pub fn sup_abs(&self) -> T {
        crate::scalar::sup_abs(self.gamma.iter().copied())
    }
}

/// Inverse metric at every node.
pub fn inverse_metric<T: Real>(m: &DiscreteManifold<T>) -> Result<Vec<T>> {
    let n = m.dim();
    let per: Vec<Option<Vec<T>>> =
        (0..m.len()).into_par_iter().map(|v| linalg::sym_inverse(m.metric().at(v), n)).collect();
    let mut out = Vec::with_capacity(m.len() * n * n);
    for (v, g) in per.into_iter().enumerate() {
        out.extend(g.ok_or(Error::Singular { node: v })?);
    }
    Ok(out)
}

/// Metric first derivatives in `[node][k][i][j]` layout.
pub(crate) fn metric_first_derivatives<T: Real>(m: &DiscreteManifold<T>) -> Vec<T> {
    let n = m.dim();
    let lat = m.lattice();
    let parts: Vec<Vec<T>> = (0..n).map(|k| fd::partial(lat, m.metric().raw(), n * n, k)).collect();
    let mut dg = vec![T::zero(); m.len() * n * n * n];
    dg.par_chunks_mut(n * n * n).enumerate().for_each(|(v, d)| {
        for k in 0..n {
            d[k * n * n..(k + 1) * n * n].copy_from_slice(&parts[k][v * n * n..(v + 1) * n * n]);
        }
    });
    dg
}

/// `Gamma^c_ab = 1/2 g^{cm} (d_a g_bm + d_b g_am - d_m g_ab)`.
pub fn christoffel<T: Real>(m: &DiscreteManifold<T>) -> Result<ConnectionField<T>> {
    let n = m.dim();
    let ginv = inverse_metric(m)?;
    let dg = metric_first_derivatives(m);
    let n3 = n * n * n;
    let mut gamma = vec![T::zero(); m.len() * n3];
    let half = T::lit(0.5);
    gamma.par_chunks_mut(n3).enumerate().for_each(|(v, gv)| {
        let gi = &ginv[v * n * n..(v + 1) * n * n];
        let d = &dg[v * n3..(v + 1) * n3];
        let dd = |k: usize, i: usize, j: usize| d[(k * n + i) * n + j];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = T::zero();
                    for mm in 0..n {
                        let gcm = gi[c * n + mm];
                        if gcm == T::zero() {
                            continue;
                        }
                        s = s + gcm * (dd(a, b, mm) + dd(b, a, mm) - dd(mm, a, b));
                    }
                    gv[(c * n + a) * n + b] = half * s;
                }
            }
        }
    });
    Ok(ConnectionField { dim: n, gamma, ginv, dg })
}
