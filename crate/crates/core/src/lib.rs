//! Sparse polynomial chaos expansions from few model runs.
//!
//! Coefficients are estimated with Orthogonal Matching Pursuit, the residual
//! tolerance (and, for fixed bases, the degree) is chosen by K-fold cross
//! validation, and [`basis_selection`] grows anisotropic index sets
//! iteratively by restricting to the recovered support and expanding it
//! along admissible forward neighbours.

pub mod basis_selection;
pub mod benchmarks;
pub mod crossval;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod multiindex;
pub mod orthopoly;
pub mod sampling;
pub mod sparse_solver;

pub use error::{PceError, Result};
