use rayon::prelude::*;

use super::connection::{christoffel, ConnectionField};
use super::fd;
use super::tensor::covariant_derivative;
use crate::error::Result;
use crate::grid::{DiscreteManifold, ScalarField, TensorField};
use crate::scalar::Real;

/// Largest violations of the algebraic curvature symmetries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryResiduals<T> {
    /// `max |Riem_abcd + Riem_bacd|`.
    pub antisym_12: T,
    /// `max |Riem_abcd + Riem_abdc|`.
    pub antisym_34: T,
    /// `max |Riem_abcd - Riem_cdab|`.
    pub pair_swap: T,
    /// `max |Riem_abcd + Riem_bcad + Riem_cabd|`.
    pub first_bianchi: T,
}

/// Riemann tensor (Besse sign: `Riem(x,y,x,y)` is the sectional curvature
/// of an orthonormal pair), Ricci tensor and scalar curvature.
#[derive(Clone, Debug)]
pub struct CurvatureBundle<T> {
    pub riem: TensorField<T>,
    pub ric: TensorField<T>,
    pub scalar: ScalarField<T>,
    pub residuals: SymmetryResiduals<T>,
}

/// Curvature from the metric of `m`.
pub fn riemann<T: Real>(m: &DiscreteManifold<T>) -> Result<CurvatureBundle<T>> {
    let conn = christoffel(m)?;
    Ok(riemann_with(m, &conn))
}

pub fn scalar_curvature<T: Real>(m: &DiscreteManifold<T>) -> Result<ScalarField<T>> {
    Ok(riemann(m)?.scalar)
}

/// Curvature using a precomputed connection. `d Gamma` comes from the
/// chain rule applied to compact second differences of the metric.
pub fn riemann_with<T: Real>(m: &DiscreteManifold<T>, conn: &ConnectionField<T>) -> CurvatureBundle<T> {
    let n = m.dim();
    let lat = m.lattice();
    let (n2, n3, n4) = (n * n, n * n * n, n * n * n * n);
    // ddg[(k,l)] for k <= l: second derivatives of all metric components
    let mut ddg: Vec<Vec<T>> = Vec::new();
    let mut pair = vec![0usize; n * n];
    for k in 0..n {
        for l in k..n {
            pair[k * n + l] = ddg.len();
            pair[l * n + k] = ddg.len();
            ddg.push(fd::second(lat, m.metric().raw(), n2, k, l));
        }
    }
    let half = T::lit(0.5);
    let mut riem = vec![T::zero(); m.len() * n4];
    riem.par_chunks_mut(n4).enumerate().for_each(|(v, out)| {
        let g = m.metric().at(v);
        let gi = conn.ginv_at(v);
        let dg = conn.dg_at(v);
        let gam = conn.at(v);
        let d = |k: usize, i: usize, j: usize| dg[(k * n + i) * n + j];
        let dd = |k: usize, l: usize, i: usize, j: usize| ddg[pair[k * n + l]][v * n2 + i * n + j];
        // d_k g^{cm}
        let mut dginv = vec![T::zero(); n3];
        for k in 0..n {
            for c in 0..n {
                for mm in 0..n {
                    let mut s = T::zero();
                    for p in 0..n {
                        for q in 0..n {
                            s = s + gi[c * n + p] * d(k, p, q) * gi[q * n + mm];
                        }
                    }
                    dginv[(k * n + c) * n + mm] = -s;
                }
            }
        }
        // L_mab = d_a g_bm + d_b g_am - d_m g_ab
        let mut lsym = vec![T::zero(); n3];
        for mm in 0..n {
            for a in 0..n {
                for b in 0..n {
                    lsym[(mm * n + a) * n + b] = d(a, b, mm) + d(b, a, mm) - d(mm, a, b);
                }
            }
        }
        // d_k Gamma^c_ab
        let mut dgam = vec![T::zero(); n4];
        for k in 0..n {
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut s = T::zero();
                        for mm in 0..n {
                            let dl = dd(k, a, b, mm) + dd(k, b, a, mm) - dd(k, mm, a, b);
                            s = s + dginv[(k * n + c) * n + mm] * lsym[(mm * n + a) * n + b] + gi[c * n + mm] * dl;
                        }
                        dgam[((k * n + c) * n + a) * n + b] = half * s;
                    }
                }
            }
        }
        let gm = |c: usize, a: usize, b: usize| gam[(c * n + a) * n + b];
        let dgm = |k: usize, c: usize, a: usize, b: usize| dgam[((k * n + c) * n + a) * n + b];
        // R^e_abc (R(d_a, d_b) d_c = R^e_abc d_e), then Riem_abcd = -g_de R^e_abc
        let mut r_up = vec![T::zero(); n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        let mut s = dgm(a, e, b, c) - dgm(b, e, a, c);
                        for f in 0..n {
                            s = s + gm(f, b, c) * gm(e, a, f) - gm(f, a, c) * gm(e, b, f);
                        }
                        r_up[e] = s;
                    }
                    for dd_ in 0..n {
                        let mut s = T::zero();
                        for e in 0..n {
                            s = s + g[dd_ * n + e] * r_up[e];
                        }
                        out[((a * n + b) * n + c) * n + dd_] = -s;
                    }
                }
            }
        }
    });
    let riem = TensorField { one_sided: lat.has_boundary(), ..TensorField::covariant(n, 4, riem) };
    let (ric, scalar) = ricci_and_scalar(&riem, &conn.ginv);
    let residuals = symmetry_residuals(&riem);
    CurvatureBundle { riem, ric, scalar, residuals }
}

/// `Ric_bd = g^{ac} Riem_abcd`, `R = g^{bd} Ric_bd`.
pub fn ricci_and_scalar<T: Real>(riem: &TensorField<T>, ginv: &[T]) -> (TensorField<T>, ScalarField<T>) {
    let n = riem.dim;
    let nodes = riem.nodes();
    let mut ric = vec![T::zero(); nodes * n * n];
    let mut scal = vec![T::zero(); nodes];
    for v in 0..nodes {
        let r = riem.at(v);
        let gi = &ginv[v * n * n..(v + 1) * n * n];
        let mut s = T::zero();
        for b in 0..n {
            for d in 0..n {
                let mut acc = T::zero();
                for a in 0..n {
                    for c in 0..n {
                        acc = acc + gi[a * n + c] * r[((a * n + b) * n + c) * n + d];
                    }
                }
                ric[v * n * n + b * n + d] = acc;
            }
        }
        for b in 0..n {
            for d in 0..n {
                s = s + gi[b * n + d] * ric[v * n * n + b * n + d];
            }
        }
        scal[v] = s;
    }
    let ric = TensorField { one_sided: riem.one_sided, ..TensorField::covariant(n, 2, ric) };
    (ric, ScalarField(scal))
}

pub fn symmetry_residuals<T: Real>(riem: &TensorField<T>) -> SymmetryResiduals<T> {
    let n = riem.dim;
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    let mut r = SymmetryResiduals { antisym_12: T::zero(), antisym_34: T::zero(), pair_swap: T::zero(), first_bianchi: T::zero() };
    for v in 0..riem.nodes() {
        let t = riem.at(v);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let x = t[idx(a, b, c, d)];
                        r.antisym_12 = r.antisym_12.max((x + t[idx(b, a, c, d)]).abs());
                        r.antisym_34 = r.antisym_34.max((x + t[idx(a, b, d, c)]).abs());
                        r.pair_swap = r.pair_swap.max((x - t[idx(c, d, a, b)]).abs());
                        r.first_bianchi = r.first_bianchi.max((x + t[idx(b, c, a, d)] + t[idx(c, a, b, d)]).abs());
                    }
                }
            }
        }
    }
    r
}

/// Contracted second Bianchi residual `max |dR - 2 div Ric|` over nodes,
/// with `(div Ric)_b = g^{ac} (nabla_a Ric)_cb`.
pub fn contracted_bianchi_residual<T: Real>(
    m: &DiscreteManifold<T>,
    conn: &ConnectionField<T>,
    bundle: &CurvatureBundle<T>,
    interior_only: bool,
) -> Result<T> {
    let n = m.dim();
    let dric = covariant_derivative(m, conn, &bundle.ric, 1)?;
    let dr = fd::gradient(m.lattice(), &bundle.scalar);
    let mut worst = T::zero();
    for v in 0..m.len() {
        if interior_only && m.lattice().is_boundary(v) {
            continue;
        }
        let gi = conn.ginv_at(v);
        let t = dric.at(v);
        for b in 0..n {
            let mut div = T::zero();
            for a in 0..n {
                for c in 0..n {
                    div = div + gi[a * n + c] * t[(a * n + c) * n + b];
                }
            }
            worst = worst.max((dr[v * n + b] - (div + div)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_box_manifold, ManifoldSpec};

    #[test]
    fn flat_torus_zero() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::flat_torus(6)).unwrap();
        let b = riemann(&m).unwrap();
        assert_eq!(b.scalar.sup_abs(), 0.0);
        assert_eq!(crate::scalar::sup_abs(b.riem.data.iter().copied()), 0.0);
    }

    #[test]
    fn cylinder_chart_is_flat() {
        let err = |nodes: usize| {
            let m = build_box_manifold::<f64>(&ManifoldSpec::cylinder(nodes)).unwrap();
            crate::scalar::sup_abs(riemann(&m).unwrap().riem.data.iter().copied())
        };
        // g_thth = r^2 is quadratic, so all stencils are exact
        assert!(err(9) < 1e-10);
    }
}
