//! Desk-scale toolkit for generalized Morrey spaces on uniform grids in one
//! and two dimensions: norms over ball families, growth-function condition
//! checkers, asymptotic vanishing diagnostics, constructive approximation by
//! smooth compactly supported functions, block decompositions, and singular
//! integral operators.
//!
//! Everything is finite and measured: limits become ladders of measured
//! values plus a fitted trend, and every verification suite reports the
//! constants it actually observed.

pub mod approx;
pub mod blocks;
pub mod czo;
pub mod error;
pub mod functions;
pub mod grid;
pub mod growth;
pub mod morrey;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
