//! Executable axioms for non-relativistic quantum mechanics of composite
//! systems, checked in finite-dimensional representations.

pub mod bell;
pub mod charge;
pub mod dynamics;
pub mod epr;
pub mod error;
pub mod galilei;
pub mod grid;
pub mod hilbert;
pub mod mereology;
pub mod report;
pub mod suites;
pub mod symmetry;

pub use error::{Error, Result};
