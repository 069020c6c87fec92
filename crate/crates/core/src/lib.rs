//! Statevector simulation of one-way quantum computation with inaccurate
//! measurements.
//!
//! - [`state`]: dense register, CZ, destructive projective measurement,
//!   reduced single-qubit states
//! - [`basis`]: ideal, deviated and adaptive measurement bases
//! - [`pattern`]: one-buffered x-rotation, z-rotation and C-NOT patterns
//! - [`analysis`]: closed-form branch statistics, mean fidelity and its
//!   entanglement bound, checked against simulation
//! - [`experiment`]: seeded sweeps, report emission and gate checks

pub mod analysis;
pub mod basis;
pub mod error;
pub mod experiment;
pub mod pattern;
pub mod state;

pub use basis::{adaptive_basis, deviated_basis, ideal_basis, BasisPair, DeviationParams, MeasurementAngle, Outcome};
pub use error::{Error, Result};
pub use state::{fidelity, Gate2x2, SingleQubitDensity, StateVector};
