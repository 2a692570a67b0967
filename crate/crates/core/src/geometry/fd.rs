//! Second-order finite differences on box lattices.
//!
//! Central stencils in the interior and on periodic axes, second-order
//! one-sided stencils at the ends of interval axes. Fields are node-major
//! with `ncomp` components per node.

use rayon::prelude::*;

use crate::grid::Lattice;
use crate::scalar::Real;

#[inline]
fn nb<T: Real>(lat: &Lattice<T>, v: usize, a: usize, d: isize) -> usize {
    lat.shift(v, a, d).expect("stencil outside lattice")
}

/// `d/dx_a` of every component.
pub fn partial<T: Real>(lat: &Lattice<T>, data: &[T], ncomp: usize, a: usize) -> Vec<T> {
    let mut out = vec![T::zero(); data.len()];
    let ax = lat.axis(a);
    let h = ax.h;
    let two_h = h + h;
    let (three, four) = (T::lit(3.0), T::lit(4.0));
    out.par_chunks_mut(ncomp).enumerate().for_each(|(v, o)| {
        let i = lat.index_along(v, a);
        if ax.periodic || (i > 0 && i + 1 < ax.nodes) {
            let p = nb(lat, v, a, 1) * ncomp;
            let m = nb(lat, v, a, -1) * ncomp;
            for c in 0..ncomp {
                o[c] = (data[p + c] - data[m + c]) / two_h;
            }
        } else {
            let s: isize = if i == 0 { 1 } else { -1 };
            let sign = if i == 0 { T::one() } else { -T::one() };
            let f0 = v * ncomp;
            let f1 = nb(lat, v, a, s) * ncomp;
            let f2 = nb(lat, v, a, 2 * s) * ncomp;
            for c in 0..ncomp {
                o[c] = sign * (-three * data[f0 + c] + four * data[f1 + c] - data[f2 + c]) / two_h;
            }
        }
    });
    out
}

/// `d^2/dx_a^2` with the compact three-point stencil (four-point one-sided
/// at interval ends).
pub fn second_pure<T: Real>(lat: &Lattice<T>, data: &[T], ncomp: usize, a: usize) -> Vec<T> {
    let mut out = vec![T::zero(); data.len()];
    let ax = lat.axis(a);
    let h2 = ax.h * ax.h;
    let (two, four, five) = (T::lit(2.0), T::lit(4.0), T::lit(5.0));
    out.par_chunks_mut(ncomp).enumerate().for_each(|(v, o)| {
        let i = lat.index_along(v, a);
        if ax.periodic || (i > 0 && i + 1 < ax.nodes) {
            let p = nb(lat, v, a, 1) * ncomp;
            let m = nb(lat, v, a, -1) * ncomp;
            let z = v * ncomp;
            for c in 0..ncomp {
                o[c] = (data[p + c] - two * data[z + c] + data[m + c]) / h2;
            }
        } else {
            let s: isize = if i == 0 { 1 } else { -1 };
            let f0 = v * ncomp;
            let f1 = nb(lat, v, a, s) * ncomp;
            let f2 = nb(lat, v, a, 2 * s) * ncomp;
            let f3 = nb(lat, v, a, 3 * s) * ncomp;
            for c in 0..ncomp {
                o[c] = (two * data[f0 + c] - five * data[f1 + c] + four * data[f2 + c] - data[f3 + c]) / h2;
            }
        }
    });
    out
}

/// `d^2/dx_a dx_b`: compact pure stencil when `a == b`, otherwise the
/// composition of first differences (the four-point cross in the interior).
pub fn second<T: Real>(lat: &Lattice<T>, data: &[T], ncomp: usize, a: usize, b: usize) -> Vec<T> {
    if a == b {
        second_pure(lat, data, ncomp, a)
    } else {
        partial(lat, &partial(lat, data, ncomp, a), ncomp, b)
    }
}

/// Coordinate gradient of a scalar field: `n` components per node.
pub fn gradient<T: Real>(lat: &Lattice<T>, f: &[T]) -> Vec<T> {
    let n = lat.dim();
    let parts: Vec<Vec<T>> = (0..n).map(|a| partial(lat, f, 1, a)).collect();
    let mut out = vec![T::zero(); f.len() * n];
    for v in 0..f.len() {
        for a in 0..n {
            out[v * n + a] = parts[a][v];
        }
    }
    out
}

/// Coordinate Hessian `d_a d_b f`: `n^2` components per node.
pub fn coordinate_hessian<T: Real>(lat: &Lattice<T>, f: &[T]) -> Vec<T> {
    let n = lat.dim();
    let mut out = vec![T::zero(); f.len() * n * n];
    for a in 0..n {
        for b in a..n {
            let s = second(lat, f, 1, a, b);
            for v in 0..f.len() {
                out[v * n * n + a * n + b] = s[v];
                out[v * n * n + b * n + a] = s[v];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    fn lat(nodes: usize, periodic: bool) -> Lattice<f64> {
        let ax = if periodic { Axis::periodic(0.0, 1.0, nodes) } else { Axis::interval(0.0, 1.0, nodes) };
        Lattice::new(vec![ax, Axis::periodic(0.0, 1.0, 5)])
    }

    #[test]
    fn quadratics_are_exact() {
        let l = lat(9, false);
        let f: Vec<f64> = (0..l.len()).map(|v| {
            let x = l.coords(v)[0];
            3.0 * x * x - x + 2.0
        }).collect();
        let d = partial(&l, &f, 1, 0);
        let dd = second_pure(&l, &f, 1, 0);
        for v in 0..l.len() {
            let x = l.coords(v)[0];
            assert!((d[v] - (6.0 * x - 1.0)).abs() < 1e-12);
            assert!((dd[v] - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn second_order_convergence_periodic() {
        let err = |nodes: usize| {
            let l = lat(nodes, true);
            let f: Vec<f64> = (0..l.len()).map(|v| (std::f64::consts::TAU * l.coords(v)[0]).sin()).collect();
            let d = partial(&l, &f, 1, 0);
            (0..l.len())
                .map(|v| (d[v] - std::f64::consts::TAU * (std::f64::consts::TAU * l.coords(v)[0]).cos()).abs())
                .fold(0.0, f64::max)
        };
        let r = err(16) / err(32);
        assert!(r > 3.8 && r < 4.2, "ratio {r}");
    }
}
