use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid too small for the stencil: need at least {min} nodes per axis, got {got}")]
    Stencil { min: usize, got: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("tensor inversion failed: {0}")]
    Inversion(String),

    #[error("N + K*delta is not positive definite at node {node} (eigenvalues {eig_min:.3e}, {eig_max:.3e})")]
    BStarViolation { node: usize, eig_min: f64, eig_max: f64 },

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("line search stalled at iteration {iter}: J = {value:.6e}, |g| = {grad_norm:.3e}, last step {step:.3e}")]
    Stall {
        iter: usize,
        value: f64,
        grad_norm: f64,
        step: f64,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("tensor hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("range error: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;
