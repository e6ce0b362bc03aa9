//! Dual-unitary circuits built from biunitary blocks, projected ensembles and
//! emergent quantum state designs.

pub mod biunitary;
pub mod circuit;
pub mod combinatorics;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod states;
pub mod tensor;
pub mod transfer;
pub mod validate;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
