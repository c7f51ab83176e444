//! Separate quantification and mitigation of state-preparation (SP) and
//! readout errors on small qubit registers.
//!
//! The crate covers the whole loop: a density-matrix simulator with
//! preparation flips, readout flips and CNOT Pauli noise ([`sim`]); the
//! one-ancilla characterization protocol and its noisy-CNOT, zero-noise
//! extrapolation and algorithmic-cooling variants ([`characterize`]);
//! readout and preparation mitigation ([`mitigate`]); benchmark sweeps
//! ([`analysis`]); and single-qubit tomography ([`tomo`]).

pub mod analysis;
pub mod assignment;
pub mod characterize;
pub mod circuit;
pub mod counts;
pub mod error;
pub mod mitigate;
pub mod seed;
pub mod sim;
pub mod tomo;
pub mod types;

pub use assignment::AssignmentMatrix;
pub use circuit::{Circuit, Gate, NoiseModel, PauliChannel};
pub use counts::{CountsRecord, Observation};
pub use error::{Error, Result};
pub use types::{display_label, Distribution, ErrorRates, Estimate, QuasiDistribution, SpamRates};
