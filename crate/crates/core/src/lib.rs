//! Variational imaginary-time evolution (QITE) and quantum iterative power
//! algorithms (QIPA) on an exact statevector simulator.
//!
//! Qubit 0 is the least-significant bit of every basis-state label.

pub mod circuits;
pub mod encoding;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mclachlan;
pub mod pauli;
pub mod solver;

pub use error::{Error, Result};
pub use pauli::{Observable, Pauli, PauliWord, Phase};
