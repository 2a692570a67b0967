//! Small dense linear algebra on row-major `n x n` slices.
//!
//! Everything here is generic over [`Real`] and allocation-light; matrices
//! are at most the dimension of the manifold (or the order of an extension
//! scheme), so plain loops are fine.

use crate::scalar::Real;

#[inline]
pub fn at<T: Real>(a: &[T], n: usize, i: usize, j: usize) -> T {
    a[i * n + j]
}

pub fn identity<T: Real>(n: usize) -> Vec<T> {
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = T::one();
    }
    m
}

pub fn matmul<T: Real>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] = c[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn transpose<T: Real>(a: &[T], n: usize) -> Vec<T> {
    let mut t = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// Quadratic form `x^T a x`.
pub fn quad<T: Real>(a: &[T], n: usize, x: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..n {
        let mut r = T::zero();
        for j in 0..n {
            r = r + a[i * n + j] * x[j];
        }
        s = s + x[i] * r;
    }
    s
}

pub fn matvec<T: Real>(a: &[T], n: usize, x: &[T]) -> Vec<T> {
    (0..n)
        .map(|i| (0..n).fold(T::zero(), |s, j| s + a[i * n + j] * x[j]))
        .collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a (numerically) singular matrix.
pub fn solve<T: Real>(a: &[T], b: &[T], n: usize) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = a.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() <= scale * T::epsilon() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                m[r * n + j] = m[r * n + j] - f * m[col * n + j];
            }
            x[r] = x[r] - f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in col + 1..n {
            s = s - m[col * n + j] * x[j];
        }
        x[col] = s / m[col * n + col];
    }
    Some(x)
}

/// Inverse by Gauss-Jordan with partial pivoting.
pub fn inverse<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut inv = identity::<T>(n);
    let scale = a.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() <= scale * T::epsilon() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
        }
        let d = m[col * n + col];
        for j in 0..n {
            m[col * n + j] = m[col * n + j] / d;
            inv[col * n + j] = inv[col * n + j] / d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == T::zero() {
                continue;
            }
            for j in 0..n {
                m[r * n + j] = m[r * n + j] - f * m[col * n + j];
                inv[r * n + j] = inv[r * n + j] - f * inv[col * n + j];
            }
        }
    }
    Some(inv)
}

/// Inverse of a symmetric matrix, symmetrized so that the result is exactly
/// symmetric.
pub fn sym_inverse<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut inv = inverse(a, n)?;
    let half = T::lit(0.5);
    for i in 0..n {
        for j in i + 1..n {
            let v = (inv[i * n + j] + inv[j * n + i]) * half;
            inv[i * n + j] = v;
            inv[j * n + i] = v;
        }
    }
    Some(inv)
}

/// Cholesky factor `L` (lower triangular, row-major) with `a = L L^T`.
pub fn cholesky<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

pub fn determinant<T: Real>(a: &[T], n: usize) -> T {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {
            let mut m = a.to_vec();
            let mut det = T::one();
            for col in 0..n {
                let mut piv = col;
                for r in col + 1..n {
                    if m[r * n + col].abs() > m[piv * n + col].abs() {
                        piv = r;
                    }
                }
                if m[piv * n + col] == T::zero() {
                    return T::zero();
                }
                if piv != col {
                    for j in 0..n {
                        m.swap(col * n + j, piv * n + j);
                    }
                    det = -det;
                }
                let d = m[col * n + col];
                det = det * d;
                for r in col + 1..n {
                    let f = m[r * n + col] / d;
                    for j in col..n {
                        m[r * n + j] = m[r * n + j] - f * m[col * n + j];
                    }
                }
            }
            det
        }
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the eigenvectors as the
/// columns of a row-major matrix. Diagonal input is returned unchanged.
pub fn sym_eigen<T: Real>(a: &[T], n: usize) -> Option<(Vec<T>, Vec<T>)> {
    let mut m = a.to_vec();
    let mut v = identity::<T>(n);
    let norm = a.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    if !norm.is_finite() {
        return None;
    }
    let tiny = T::epsilon() * T::epsilon() * norm * norm;
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + m[i * n + j] * m[i * n + j];
            }
        }
        if off <= tiny {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = T::zero();
                m[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals: Vec<T> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vecs = vec![T::zero(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = v[k * n + old];
        }
    }
    if vals.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some((vals, vecs))
}

/// `V diag(f(lambda)) V^T` for a symmetric matrix; exactly symmetric output.
pub fn sym_apply<T: Real>(a: &[T], n: usize, f: impl Fn(T) -> T) -> Option<Vec<T>> {
    let (vals, vecs) = sym_eigen(a, n)?;
    let fv: Vec<T> = vals.into_iter().map(f).collect();
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = T::zero();
            for k in 0..n {
                s = s + vecs[i * n + k] * fv[k] * vecs[j * n + k];
            }
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    Some(out)
}

pub fn sym_log<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let (vals, _) = sym_eigen(a, n)?;
    if vals.iter().any(|v| !(*v > T::zero())) {
        return None;
    }
    sym_apply(a, n, |x| x.ln())
}

pub fn sym_exp<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    sym_apply(a, n, |x| x.exp())
}

pub fn min_eigenvalue<T: Real>(a: &[T], n: usize) -> Option<T> {
    sym_eigen(a, n).map(|(v, _)| v[0])
}

/// Eigenvalues of `b` relative to `a` (both SPD): the spectrum of
/// `L^{-1} b L^{-T}` with `a = L L^T`. Ascending.
pub fn relative_eigenvalues<T: Real>(a: &[T], b: &[T], n: usize) -> Option<Vec<T>> {
    let l = cholesky(a, n)?;
    // y = L^{-1} b, then z = y L^{-T}
    let mut y = b.to_vec();
    for col in 0..n {
        for i in 0..n {
            let mut s = y[i * n + col];
            for k in 0..i {
                s = s - l[i * n + k] * y[k * n + col];
            }
            y[i * n + col] = s / l[i * n + i];
        }
    }
    let mut z = y.clone();
    for row in 0..n {
        for j in 0..n {
            let mut s = z[row * n + j];
            for k in 0..j {
                s = s - z[row * n + k] * l[j * n + k];
            }
            z[row * n + j] = s / l[j * n + j];
        }
    }
    let half = T::lit(0.5);
    for i in 0..n {
        for j in i + 1..n {
            let v = (z[i * n + j] + z[j * n + i]) * half;
            z[i * n + j] = v;
            z[j * n + i] = v;
        }
    }
    sym_eigen(&z, n).map(|(v, _)| v)
}

/// Operator 2-norm of a symmetric matrix.
pub fn sym_norm2<T: Real>(a: &[T], n: usize) -> Option<T> {
    let (v, _) = sym_eigen(a, n)?;
    Some(v[0].abs().max(v[n - 1].abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a: [f64; 9] = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = inverse(&a, 3).unwrap();
        let p = matmul(&a, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p[i * 3 + j] - e).abs() < 1e-14);
            }
        }
        assert!((determinant(&a, 3) - determinant(&a.to_vec(), 3)).abs() < 1e-15);
    }

    #[test]
    fn eigen_reconstructs() {
        let a: [f64; 9] = [2.0, -1.0, 0.3, -1.0, 2.0, -0.7, 0.3, -0.7, 5.0];
        let (vals, vecs) = sym_eigen(&a, 3).unwrap();
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        let r = sym_apply(&a, 3, |x| x).unwrap();
        for k in 0..9 {
            assert!((r[k] - a[k]).abs() < 1e-13);
        }
        let vt = transpose(&vecs, 3);
        let q = matmul(&vt, &vecs, 3);
        for i in 0..3 {
            assert!((q[i * 4] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn log_exp_inverse() {
        let a: [f64; 9] = [3.0, 0.4, 0.1, 0.4, 1.5, 0.0, 0.1, 0.0, 0.7];
        let l = sym_log(&a, 3).unwrap();
        let e = sym_exp(&l, 3).unwrap();
        for k in 0..9 {
            assert!((e[k] - a[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_is_untouched() {
        let a = [2.0f64, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.5];
        let l = sym_log(&a, 3).unwrap();
        assert_eq!(l[0], 2.0f64.ln());
        assert_eq!(l[4], 5.0f64.ln());
        assert_eq!(l[1], 0.0);
    }

    #[test]
    fn relative_eigs_diag() {
        let a = identity::<f64>(3);
        let b = [1.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 1.0];
        let v = relative_eigenvalues(&a, &b, 3).unwrap();
        assert!((v[2] - v[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn solve_vandermonde() {
        let a: [f64; 9] = [1.0, 1.0, 1.0, -1.0, -2.0, -4.0, 1.0, 4.0, 16.0];
        let x = solve(&a, &[1.0, 1.0, 1.0], 3).unwrap();
        let r = matvec(&a, 3, &x);
        for v in r {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn works_in_f32() {
        let a = [2.0f32, 0.5, 0.5, 1.0];
        let inv = inverse(&a, 2).unwrap();
        let p = matmul(&a, &inv, 2);
        assert!((p[0] - 1.0).abs() < 1e-6 && p[1].abs() < 1e-6);
        assert!(cholesky(&a, 2).is_some());
    }
}
