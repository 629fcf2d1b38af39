//! Invariants of states on Cuntz algebras.

pub mod acceptance;
pub mod classify;
pub mod error;
pub mod fcs;
pub mod linalg;
pub mod moments;
pub mod random;
pub mod scalar;
pub mod schema;
pub mod shiftrep;
pub mod statespec;
pub mod symalg;
pub mod words;

pub use error::{Error, Result};
pub use scalar::{Mode, Scalar, Tol};
pub use symalg::CuntzElement;
pub use words::{EventuallyPeriodicWord, LazyPreset, LazyWord, Word};
