//! Finite-dimensional operator-algebraic quantum probability.
//!
//! The crate builds concrete *-algebras of matrices, turns states into GNS
//! representations, decomposes them into sectors over central subalgebras,
//! models measurement processes as a unitary interaction plus an apparatus
//! state, and checks Born-rule identities numerically.

pub mod algebra;
pub mod equivalence;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod measurement;
pub mod random;
pub mod sector;
pub mod state;
pub mod tol;

pub use algebra::StarAlgebra;
pub use error::{Error, Result};
pub use exec::Exec;
pub use linalg::{CMatrix, C64};
pub use measurement::{ideal_measurement, pvm_from_observable, MeasurementProcess, Pvm};
pub use state::{gns, is_state, normal_lift, GnsRepresentation, State};
