use super::field::{ScalarField2, ScalarField3};
use super::grid::{BoundaryPart, Grid2, Grid3, MIN_NODES};
use super::stencil::{apply_axis, Stencil};
use crate::error::{Error, Result};

/// Coordinate direction on a 2D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Axis::X
        } else {
            Axis::Y
        }
    }
}

fn check(grid: &Grid2) -> Result<()> {
    let got = grid.nx.min(grid.ny);
    if got < MIN_NODES {
        return Err(Error::Stencil { min: MIN_NODES, got });
    }
    Ok(())
}

fn along(f: &ScalarField2, axis: Axis, st: Stencil) -> ScalarField2 {
    let g = f.grid;
    ScalarField2 {
        grid: g,
        values: apply_axis(&f.values, &g.shape(), axis.index(), g.spacing(axis.index()), st),
    }
}

/// First derivative: central differences inside, second-order one-sided
/// stencils on boundary nodes.
pub fn diff1(f: &ScalarField2, axis: Axis) -> Result<ScalarField2> {
    check(&f.grid)?;
    Ok(along(f, axis, Stencil::D1Central))
}

/// Second derivative. Pure derivatives use the three-point stencil; mixed
/// derivatives compose [`diff1`] in a fixed order, so `diff2(f, X, Y)` and
/// `diff2(f, Y, X)` are bitwise identical.
pub fn diff2(f: &ScalarField2, a: Axis, b: Axis) -> Result<ScalarField2> {
    check(&f.grid)?;
    if a == b {
        Ok(along(f, a, Stencil::D2Central))
    } else {
        Ok(along(&along(f, Axis::Y, Stencil::D1Central), Axis::X, Stencil::D1Central))
    }
}

/// Summation-by-parts first derivative (central inside, first-order ends).
/// Paired with trapezoid weights, discrete integration by parts is exact up
/// to the boundary flux.
pub fn sbp_diff1(f: &ScalarField2, axis: Axis) -> ScalarField2 {
    along(f, axis, Stencil::Sbp)
}

/// `G^T v` for the plain matrix transpose of [`sbp_diff1`].
pub fn sbp_diff1_transpose(v: &[f64], grid: &Grid2, axis: Axis) -> Vec<f64> {
    apply_axis(v, &grid.shape(), axis.index(), grid.spacing(axis.index()), Stencil::SbpTranspose)
}

/// Hessian entry built by composing [`sbp_diff1`]; the inner derivative is
/// always along y for mixed entries so both orderings agree bitwise.
pub fn sbp_hessian(f: &ScalarField2, a: Axis, b: Axis) -> ScalarField2 {
    if a == b {
        sbp_diff1(&sbp_diff1(f, a), a)
    } else {
        sbp_diff1(&sbp_diff1(f, Axis::Y), Axis::X)
    }
}

/// Transpose of [`sbp_hessian`] applied to `v`.
pub fn sbp_hessian_transpose(v: &[f64], grid: &Grid2, a: Axis, b: Axis) -> Vec<f64> {
    if a == b {
        sbp_diff1_transpose(&sbp_diff1_transpose(v, grid, a), grid, a)
    } else {
        sbp_diff1_transpose(&sbp_diff1_transpose(v, grid, Axis::X), grid, Axis::Y)
    }
}

/// Trapezoid quadrature over the rectangle.
pub fn integrate_domain(f: &ScalarField2) -> f64 {
    f.grid.weights().iter().zip(&f.values).map(|(w, v)| w * v).sum()
}

/// Result of a boundary line integral. `empty` is set when no edge of the
/// requested part exists (the value is then 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryIntegral {
    pub value: f64,
    pub empty: bool,
}

/// Trapezoid rule along every edge carrying the requested label, applied to
/// the boundary trace of `f`.
pub fn integrate_boundary(f: &ScalarField2, part: BoundaryPart) -> BoundaryIntegral {
    if !f.grid.has_part(part) {
        return BoundaryIntegral { value: 0.0, empty: true };
    }
    let w = f.grid.boundary_weights(part);
    BoundaryIntegral { value: w.iter().zip(&f.values).map(|(w, v)| w * v).sum(), empty: false }
}

pub fn sbp_diff1_3(f: &[f64], grid: &Grid3, axis: usize) -> Vec<f64> {
    apply_axis(f, &grid.shape(), axis, grid.spacing(axis), Stencil::Sbp)
}

pub fn sbp_diff1_3_transpose(v: &[f64], grid: &Grid3, axis: usize) -> Vec<f64> {
    apply_axis(v, &grid.shape(), axis, grid.spacing(axis), Stencil::SbpTranspose)
}

pub fn integrate_domain3(f: &ScalarField3) -> f64 {
    f.grid.weights().iter().zip(&f.values).map(|(w, v)| w * v).sum()
}
