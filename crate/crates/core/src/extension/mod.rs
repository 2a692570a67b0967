//! Extension beyond the boundary: finite-order Seeley reflection, the
//! positive `exp(E ln u)` extension, SPD metric extension through matrix
//! logarithms, height functions, cutting and gradient flows to a level.

mod height;
mod metric;
mod seeley;

pub use height::{
    build_height_function, cut_manifold, flow_to_level, taper, FlowOptions, FlowResult, HeightField, HeightOptions,
};
pub use metric::{extend_metric, extend_metric_with, CollarAtlas, CollarChart, ExtendedManifold};
pub use seeley::{
    extend_lattice_field, positive_extend, seeley_extend, LineExtension, PositiveExtension, SeeleyScheme, MAX_ORDER,
};
