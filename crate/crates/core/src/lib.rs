//! Numerical toolkit for homogeneous mixed Herz-Morrey spaces on dyadic grids.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod grid;
pub mod norms;
pub mod operators;

pub use error::{Error, Result};
