//! Ensembles, outcome grouping, sweeps, persistence and the scenarios behind
//! the command-line interface.

pub mod classify;
pub mod config;
pub mod ensemble;
pub mod export;
pub mod oracle_check;
pub mod scenario;
pub mod sweep;

pub use classify::{classify_and_average, theoretical_plateaus, Classification};
pub use config::{ExperimentConfig, Scenario, SweepParam};
pub use ensemble::{run_ensemble, Ensemble, EnsembleSpec, FidelityTrace, TrajectoryFailure};
pub use export::{build_id, config_hash};
pub use scenario::{run_experiment, ExperimentOutput};
pub use sweep::{sweep, SweepRow, SweepTable};
