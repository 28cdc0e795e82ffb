//! Finite-difference minimization of the nonlinear Kirchhoff-Love plate energy
//! and of a geometrically nonlinear 3D elasticity energy, together with the
//! machinery that builds and verifies a dual (complementary-energy) formulation
//! of the plate problem at a computed critical point.
//!
//! The discrete calculus is built on summation-by-parts first differences with
//! trapezoid weights, so every integration by parts used by the duality
//! relations holds exactly on the discrete level.

pub mod constitutive;
pub mod dual;
pub mod elasticity3d;
pub mod error;
pub mod fields;
pub mod oracle;
pub mod plate;
pub mod rng;
pub mod solver;

pub use constitutive::{LameParams, Tensor2D, Tensor3D};
pub use elasticity3d::{ElasticLoads, ElasticMode, ElasticProblem, ElasticState};
pub use error::{Error, Result};
pub use fields::{
    BoundaryLabel, BoundaryPart, BoundaryPartition, Grid2, Grid3, ScalarField2, ScalarField3,
    SymTensorField2, VectorField2,
};
pub use plate::{LoadSet, PlateMode, PlateState};
pub use solver::{CriticalPoint, Objective, SolveOptions};
