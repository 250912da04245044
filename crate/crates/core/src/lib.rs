//! Two-dimensional inverse medium scattering: far field synthesis with a
//! Lippmann–Schwinger volume solver, factorization-method support maps and
//! monotonicity-based bounds on the boundary values of the contrast.

// `!(x > 0.0)` rejects NaN; index loops mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod forward;
pub mod inversion_bounds;
pub mod io;
pub mod inversion_fm;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
