//! Simulation and analysis of four-qubit bound-entangled photonic states.
//!
//! The crate models the noisy Smolin state produced from two Bell-pair
//! sources with random correlated Pauli rotations, detects its entanglement
//! with a stabilizer witness, checks separability across two-two cuts via the
//! partial transpose, reconstructs states from photon counts by maximum
//! likelihood, and simulates the unlocking protocol in which a Bell
//! projection on two parties leaves the other two distillably entangled.

pub mod analysis;
pub mod bundled;
pub mod cli;
pub mod density;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod rng;
pub mod states;
pub mod tomography;
pub mod unlocking;

pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::ComplexMatrix;
