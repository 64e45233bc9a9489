//! Numerical toolkit for affine Hardy–Littlewood–Sobolev, logarithmic HLS and
//! logarithmic Sobolev inequalities: sharp constants, directional
//! correlations, star bodies built from functions, dual mixed volumes,
//! singular energies and an executable check harness.

pub mod bodies;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod correlation;
pub mod dualmix;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod quad;
pub mod report;
pub mod specfun;

pub use error::{Error, Result};
