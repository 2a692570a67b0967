//! Finite-difference Riemannian geometry on box charts.

mod boundary;
mod connection;
mod curvature;
pub mod fd;
mod laplace;
mod tensor;

pub use boundary::{boundary_geometry, boundary_geometry_with, face_manifold, normal_derivative, BoundaryData, FaceGeometry};
pub use connection::{christoffel, inverse_metric, ConnectionField};
pub use curvature::{
    contracted_bianchi_residual, ricci_and_scalar, riemann, riemann_with, scalar_curvature, symmetry_residuals,
    CurvatureBundle, SymmetryResiduals,
};
pub use laplace::{dirichlet_form, laplace_beltrami, laplace_beltrami_strong, DirichletForm};
pub use tensor::{covariant_derivative, differential, hessian, metric_tensor, norm_sq_at, tensor_norm};

use crate::error::Result;
use crate::grid::{DiscreteManifold, ScalarField, TensorField};
use crate::scalar::Real;

/// `sup |nabla^l Riem|_g` for `l = 0..=max_l`.
pub fn curvature_derivative_norms<T: Real>(m: &DiscreteManifold<T>, max_l: usize) -> Result<Vec<T>> {
    let conn = christoffel(m)?;
    let bundle = riemann_with(m, &conn);
    let mut out = vec![tensor_norm(m, &bundle.riem)?.sup_abs()];
    let mut cur: TensorField<T> = bundle.riem;
    for _ in 0..max_l {
        cur = covariant_derivative(m, &conn, &cur, 1)?;
        out.push(tensor_norm(m, &cur)?.sup_abs());
    }
    Ok(out)
}

/// `|df|^2_g` at every node.
pub fn gradient_norm_sq<T: Real>(m: &DiscreteManifold<T>, f: &[T]) -> Result<ScalarField<T>> {
    let n = m.dim();
    let ginv = inverse_metric(m)?;
    let df = fd::gradient(m.lattice(), f);
    Ok(ScalarField(
        (0..m.len())
            .map(|v| crate::linalg::quad(&ginv[v * n * n..(v + 1) * n * n], n, &df[v * n..(v + 1) * n]))
            .collect(),
    ))
}
