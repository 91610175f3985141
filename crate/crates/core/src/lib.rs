//! Numerical laboratory for radial Schrödinger systems with quadratic
//! interactions in five space dimensions.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod fields;
pub mod groundstate;
pub mod systems;

pub use error::{Error, Result};
