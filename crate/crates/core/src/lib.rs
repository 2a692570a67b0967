//! Discrete conformal geometry on box-chart manifolds.
//!
//! The crate discretises compact Riemannian manifolds (with or without
//! boundary) on structured coordinate charts and provides:
//!
//! * finite-difference connection, curvature and boundary geometry
//!   ([`geometry`]);
//! * conformal change laws and flatzoomer functionals ([`conformal`]);
//! * the conformal Laplacian with Steklov- and Robin-type boundary
//!   operators and a deterministic principal-eigenvalue solver
//!   ([`spectral`]);
//! * satellite metrics built from principal eigenfunctions, with curvature
//!   identity checks and a bounded-geometry report ([`satellite`]);
//! * Seeley-type extension operators, metric extension, height functions
//!   and cutting ([`extension`]);
//! * convergence diagnostics on synthetic manifold sequences
//!   ([`sequences`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod conformal;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod satellite;
pub mod scalar;
pub mod sequences;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Manifold = grid::DiscreteManifold<f64>;
pub type Manifold32 = grid::DiscreteManifold<f32>;
pub type Field = grid::ScalarField<f64>;
pub type Tensor = grid::TensorField<f64>;
pub type Metric = grid::MetricField<f64>;
pub type Eigen = spectral::EigenSolution<f64>;
pub type Satellite = satellite::SatelliteManifold<f64>;


