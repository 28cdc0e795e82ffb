//! Rectangular grids, nodal fields, finite-difference calculus and trapezoid
//! quadrature.

mod calculus;
mod field;
pub(crate) mod grid;
pub mod stencil;

pub use calculus::{
    diff1, diff2, integrate_boundary, integrate_domain, integrate_domain3, sbp_diff1, sbp_diff1_3,
    sbp_diff1_3_transpose, sbp_diff1_transpose, sbp_hessian, sbp_hessian_transpose, Axis,
    BoundaryIntegral,
};
pub use field::{max_abs, weighted_dot, ScalarField2, ScalarField3, SymTensorField2, VectorField2};
pub use grid::{
    trapezoid_weights, BoundaryLabel, BoundaryPart, BoundaryPartition, Edge, FacePartition, Grid2,
    Grid3, MIN_NODES,
};
