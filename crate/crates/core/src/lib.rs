//! Tikhonov-regularized nonnegative matrix factorization with automatic,
//! L-curve based selection of the regularization parameters.
//!
//! The crate factorizes a nonnegative `A ≈ BC` by minimizing
//! `½‖A − BC‖² + ½Σβ_m‖b_m‖² + ½Σα_n‖c_n‖²` with additive updates that keep
//! the factors nonnegative and escape zero locking, while each `β_m` and
//! `α_n` is re-estimated every iteration from its row or column residual.
//!
//! - [`matrix`]: dense matrices, objective and gradients
//! - [`tikhonov`]: scalar-λ Tikhonov least squares and L-curve sweeps
//! - [`engine`]: factor updates and the main loop
//! - [`regularizer`]: `β`/`α` updates and trajectory diagnostics
//! - [`diagnostics`]: per-iteration traces
//! - [`io`]: CSV and Matrix Market files
//! - [`verification`]: brute-force reference computations
//! - [`cli`]: the `tnmf` command

pub mod cli;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod io;
pub mod matrix;
pub mod regularizer;
pub mod tikhonov;
pub mod verification;

pub use engine::{FactorInit, FactorPair, Factorization, Factorizer, KktResidual, SolverConfig, Termination, Variant};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, RegParams};
