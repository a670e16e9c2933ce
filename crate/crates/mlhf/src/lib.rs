//! Real-space finite-element Hartree-Fock solver.
//!
//! The solver discretizes the Hartree-Fock equations with piecewise-linear
//! finite elements on adaptively bisected tetrahedral meshes. Two solution
//! modes are provided: a direct mode that runs a full self-consistent field
//! iteration on every adaptive space, and a multilevel-correction mode that
//! replaces the per-level nonlinear eigenproblem by one linearized boundary
//! value problem plus a small eigenproblem in a fixed low-dimensional
//! correction space, with all correction-space integrals precomputed as
//! tensors so the inner iteration cost is independent of the fine-space
//! dimension.
//!
//! All quantities are in Hartree atomic units.

pub mod driver;
pub mod eigen;
pub mod estimator;
pub mod fespace;
pub mod hartree_fock;
pub mod mesh;
pub mod mlcorrection;
pub mod par;
pub mod poisson;
pub mod quadrature;
pub mod sparse;

mod dense_guard;

pub use dense_guard::DenseAllocGuard;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("spaces are not nested (fine mesh is not a refinement descendant)")]
    NotNested,
    #[error("non-finite value during quadrature of a potential term")]
    NonFiniteQuadrature,
    #[error("linear solver did not converge within {iters} iterations (residual {residual:.3e})")]
    SolverNonConvergence { iters: usize, residual: f64 },
    #[error("operator is not positive definite")]
    Indefinite,
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("eigensolver did not converge within {iters} iterations")]
    EigenNonConvergence { iters: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("molecule file error: {0}")]
    Molecule(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing pair potential for orbital pair ({0}, {1})")]
    MissingPairPotential(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
