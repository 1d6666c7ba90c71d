//! Numerical toolkit for local mixed Morrey-type spaces on uniform grids.
//!
//! The crate samples functions on centered tensor grids, evaluates mixed
//! Lebesgue, Morrey-type and Herz norms, applies the classical operators of
//! the theory (maximal, Hardy, heat, spherical mean), builds Whitney,
//! Calderón–Zygmund and atomic decompositions, and certifies inequalities
//! numerically over a deterministic corpus.

pub mod certify;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod mixed_lebesgue;
pub mod morrey_herz;
pub mod operators;
pub mod sampled;
mod serde_ext;

pub use error::{Error, Result};
