//! Compressed sparse row matrices and a preconditioned conjugate gradient.

use rayon::prelude::*;

use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<T>,
}

/// Accumulates `(row, col, value)` triplets; duplicates are summed in
/// insertion order so assembly is deterministic.
#[derive(Clone, Debug)]
pub struct TripletBuilder<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> TripletBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self { n, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> CsrMatrix<T> {
        self.entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col = Vec::with_capacity(self.entries.len());
        let mut val: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                let k = val.len() - 1;
                val[k] = val[k] + v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n: self.n, row_ptr, col, val }
    }
}

impl<T: Real> CsrMatrix<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|(c, _)| *c == j).map(|(_, v)| v).unwrap_or_else(T::zero)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, rows evaluated independently (bit-identical to serial).
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, yi)| {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s = s + self.val[k] * x[self.col[k]];
            }
            *yi = s;
        });
    }

    /// `x^T A x`.
    pub fn quad(&self, x: &[T]) -> T {
        let ax = self.matvec(x);
        dot(x, &ax)
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).fold(T::zero(), |s, (_, v)| s + v.abs()))
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i * self.n + j] = v;
            }
        }
        d
    }

    /// `alpha * self + diag(d)`.
    pub fn scaled_plus_diag(&self, alpha: T, d: &[T]) -> CsrMatrix<T> {
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz() + self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                b.add(i, j, alpha * v);
            }
            if d[i] != T::zero() {
                b.add(i, i, d[i]);
            }
        }
        b.build()
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s = s + *x * *y;
    }
    s
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CgFailure {
    /// Non-positive curvature `p^T A p <= 0` encountered.
    Indefinite,
    MaxIter,
}

/// Jacobi-preconditioned CG for `(A - sigma diag(b)) x = rhs`.
///
/// Returns the solution and the iteration count.
pub fn pcg_shifted<T: Real>(
    a: &CsrMatrix<T>,
    bdiag: &[T],
    sigma: T,
    rhs: &[T],
    x0: &[T],
    rel_tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, usize), CgFailure> {
    let n = a.dim();
    let diag: Vec<T> = a.diagonal().iter().zip(bdiag).map(|(d, b)| *d - sigma * *b).collect();
    let apply = |x: &[T], out: &mut [T]| {
        a.matvec_into(x, out);
        for i in 0..n {
            out[i] = out[i] - sigma * bdiag[i] * x[i];
        }
    };
    let bnorm = norm2(rhs);
    let mut x = x0.to_vec();
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], 0));
    }
    let mut r = vec![T::zero(); n];
    apply(&x, &mut r);
    for i in 0..n {
        r[i] = rhs[i] - r[i];
    }
    let precond = |r: &[T]| -> Vec<T> {
        r.iter()
            .zip(&diag)
            .map(|(ri, d)| if *d > T::zero() { *ri / *d } else { *ri })
            .collect()
    };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 0..max_iter {
        if norm2(&r) <= rel_tol * bnorm {
            return Ok((x, it));
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(CgFailure::Indefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if norm2(&r) <= rel_tol * bnorm {
        Ok((x, max_iter))
    } else {
        Err(CgFailure::MaxIter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i > 0 {
                b.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(1, 0, 2.0);
        b.add(0, 0, 0.5);
        let m = b.build();
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn cg_solves_spd() {
        let a = laplacian_1d(50);
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.1).sin()).collect();
        let rhs = a.matvec(&xs);
        let zero = vec![0.0; 50];
        let (x, _) = pcg_shifted(&a, &zero, 0.0, &rhs, &zero, 1e-13, 1000).unwrap();
        for i in 0..50 {
            assert!((x[i] - xs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn cg_detects_indefinite() {
        let a = laplacian_1d(10);
        let ones = vec![1.0; 10];
        let rhs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let r = pcg_shifted(&a, &ones, 3.0, &rhs, &vec![0.0; 10], 1e-12, 100);
        assert_eq!(r.unwrap_err(), CgFailure::Indefinite);
    }
}
