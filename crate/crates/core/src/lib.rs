//! Simulation of measurement-driven W-state preparation in three qubits
//! dispersively coupled to a driven cavity, with bang-bang feedback.

pub mod algebra;
pub mod cavity;
pub mod engine;
pub mod error;
pub mod feedback;
pub mod harness;
pub mod noise;
pub mod oracle;
pub mod params;
pub mod trajectory;

pub use error::{Error, Result};
