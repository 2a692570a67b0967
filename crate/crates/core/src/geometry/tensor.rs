use rayon::prelude::*;

use super::connection::{inverse_metric, ConnectionField};
use super::fd;
use crate::error::{Error, Result};
use crate::grid::{DiscreteManifold, ScalarField, Slot, TensorField};
use crate::scalar::Real;

/// `l`-fold covariant derivative; each step prepends a covariant slot:
/// `(nabla T)_{e a..} = d_e T_{a..} - Gamma^m_{e a_i} T_{..m..} + ...`.
pub fn covariant_derivative<T: Real>(
    m: &DiscreteManifold<T>,
    conn: &ConnectionField<T>,
    t: &TensorField<T>,
    l: usize,
) -> Result<TensorField<T>> {
    if l == 0 {
        return Err(Error::InvalidParameter("covariant derivative order must be >= 1".into()));
    }
    t.check_shape(m.len())?;
    let mut cur = t.clone();
    for _ in 0..l {
        cur = nabla_once(m, conn, &cur);
    }
    Ok(cur)
}

fn nabla_once<T: Real>(m: &DiscreteManifold<T>, conn: &ConnectionField<T>, t: &TensorField<T>) -> TensorField<T> {
    let n = m.dim();
    let r = t.rank();
    let comps = t.comps();
    let lat = m.lattice();
    let parts: Vec<Vec<T>> = (0..n).map(|e| fd::partial(lat, &t.data, comps, e)).collect();
    let out_comps = comps * n;
    let mut data = vec![T::zero(); m.len() * out_comps];
    let place: Vec<usize> = (0..r).map(|i| n.pow((r - 1 - i) as u32)).collect();
    data.par_chunks_mut(out_comps).enumerate().for_each(|(v, out)| {
        let tv = t.at(v);
        let gam = conn.at(v);
        let g = |c: usize, a: usize, b: usize| gam[(c * n + a) * n + b];
        for e in 0..n {
            for idx in 0..comps {
                let mut s = parts[e][v * comps + idx];
                for (i, slot) in t.slots.iter().enumerate() {
                    let ai = (idx / place[i]) % n;
                    let base = idx - ai * place[i];
                    for mm in 0..n {
                        let tm = tv[base + mm * place[i]];
                        if tm == T::zero() {
                            continue;
                        }
                        match slot {
                            Slot::Co => s = s - g(mm, e, ai) * tm,
                            Slot::Contra => s = s + g(ai, e, mm) * tm,
                        }
                    }
                }
                out[e * comps + idx] = s;
            }
        }
    });
    let mut slots = vec![Slot::Co];
    slots.extend(t.slots.iter().copied());
    TensorField { dim: n, slots, data, one_sided: t.one_sided || lat.has_boundary() }
}

/// Pointwise `<T|T>_g` contraction at one node given `g` and `g^{-1}`.
pub fn norm_sq_at<T: Real>(n: usize, slots: &[Slot], t: &[T], g: &[T], ginv: &[T]) -> T {
    let r = slots.len();
    let comps = t.len();
    let mut raised = t.to_vec();
    let mut tmp = vec![T::zero(); comps];
    for (i, slot) in slots.iter().enumerate() {
        let place = n.pow((r - 1 - i) as u32);
        let mat = match slot {
            Slot::Co => ginv,
            Slot::Contra => g,
        };
        for idx in 0..comps {
            let ai = (idx / place) % n;
            let base = idx - ai * place;
            let mut s = T::zero();
            for mm in 0..n {
                s = s + mat[ai * n + mm] * raised[base + mm * place];
            }
            tmp[idx] = s;
        }
        std::mem::swap(&mut raised, &mut tmp);
    }
    let mut s = T::zero();
    for idx in 0..comps {
        s = s + t[idx] * raised[idx];
    }
    s
}

/// `|T|_g`, contracting covariant slots with `g^{-1}` and contravariant
/// slots with `g`.
pub fn tensor_norm<T: Real>(m: &DiscreteManifold<T>, t: &TensorField<T>) -> Result<ScalarField<T>> {
    t.check_shape(m.len())?;
    let n = m.dim();
    let ginv = inverse_metric(m)?;
    let vals = (0..m.len())
        .into_par_iter()
        .map(|v| {
            let s = norm_sq_at(n, &t.slots, t.at(v), m.metric().at(v), &ginv[v * n * n..(v + 1) * n * n]);
            s.max(T::zero()).sqrt()
        })
        .collect();
    Ok(ScalarField(vals))
}

/// The metric itself as a covariant 2-tensor field.
pub fn metric_tensor<T: Real>(m: &DiscreteManifold<T>) -> TensorField<T> {
    TensorField::covariant(m.dim(), 2, m.metric().raw().to_vec())
}

/// Differential `df` as a covariant 1-tensor.
pub fn differential<T: Real>(m: &DiscreteManifold<T>, f: &[T]) -> TensorField<T> {
    let mut t = TensorField::covariant(m.dim(), 1, fd::gradient(m.lattice(), f));
    t.one_sided = m.lattice().has_boundary();
    t
}

/// `Hess f_ab = d_a d_b f - Gamma^c_ab d_c f` with compact second
/// differences.
pub fn hessian<T: Real>(m: &DiscreteManifold<T>, conn: &ConnectionField<T>, f: &[T]) -> TensorField<T> {
    let n = m.dim();
    let lat = m.lattice();
    let dd = fd::coordinate_hessian(lat, f);
    let df = fd::gradient(lat, f);
    let mut data = dd;
    for v in 0..m.len() {
        for a in 0..n {
            for b in 0..n {
                let mut s = T::zero();
                for c in 0..n {
                    s = s + conn.get(v, c, a, b) * df[v * n + c];
                }
                data[v * n * n + a * n + b] = data[v * n * n + a * n + b] - s;
            }
        }
    }
    TensorField { one_sided: lat.has_boundary(), ..TensorField::covariant(n, 2, data) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::christoffel;
    use crate::grid::{build_box_manifold, ManifoldSpec};

    #[test]
    fn metric_norm_is_sqrt_n() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::cylinder(6)).unwrap();
        let nrm = tensor_norm(&m, &metric_tensor(&m)).unwrap();
        for x in nrm.iter() {
            assert!((x - 3f64.sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_function_flat() {
        let m = build_box_manifold::<f64>(&ManifoldSpec::flat_slab(7)).unwrap();
        let conn = christoffel(&m).unwrap();
        let f = ScalarField::from_fn(m.lattice(), |x| 2.0 * x[0] - x[2] + 0.5);
        let t = TensorField::from_scalar(&f, 3);
        let d1 = covariant_derivative(&m, &conn, &t, 1).unwrap();
        let d2 = covariant_derivative(&m, &conn, &t, 2).unwrap();
        for v in 0..m.len() {
            let g = d1.at(v);
            // periodic wrap breaks linearity along x0: check the interval axis
            assert!((g[2] + 1.0).abs() < 1e-12);
        }
        let d2z: f64 = (0..m.len()).map(|v| d2.at(v)[8].abs()).fold(0.0, f64::max);
        assert!(d2z < 1e-10);
    }
}
