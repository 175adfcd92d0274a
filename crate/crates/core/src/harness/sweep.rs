use crate::cavity::outcome_separation;
use crate::error::{Error, Result};

use super::config::{ExperimentConfig, SweepParam};
use super::ensemble::{mean_stderr, run_ensemble, EnsembleSpec};
use super::scenario::feedback_trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub fidelity: f64,
    pub stderr: f64,
    pub n_effective: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: SweepParam,
    pub readout_time: f64,
    pub rows: Vec<SweepRow>,
    /// Steady outcome gap between `|000>` and one excitation, chi sweeps only.
    pub separation: Vec<(f64, f64)>,
}

impl SweepTable {
    pub fn fidelity_at(&self, value: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| (r.value - value).abs() < 1e-12)
    }
}

/// One feedback ensemble per grid value, all sharing the master seed; reads
/// the mean fidelity at `config.readout_time`, or its average over the
/// readout window when one is set.
pub fn sweep(config: &ExperimentConfig, param: SweepParam, grid: &[f64]) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    let initial = config.initial_states[0];
    let mut rows = Vec::with_capacity(grid.len());
    for &value in grid {
        let params = param.apply(config.params, value);
        let spec = EnsembleSpec::new(
            feedback_trajectory(config, params, initial),
            config.n_trajectories,
            config.master_seed,
        )
        .with_workers(config.workers);
        let ensemble = run_ensemble(&spec)?;
        let trace = ensemble.fidelity_trace();
        let (fidelity, stderr) = if config.readout_window > 0.0 {
            let t1 = config.readout_time;
            mean_stderr(&ensemble.window_fidelities(t1 - config.readout_window, t1))
        } else {
            trace
                .at(config.readout_time)
                .ok_or_else(|| Error::InvalidArgument("empty fidelity trace".into()))?
        };
        log::info!("{param} = {value}: F = {fidelity:.4} +- {stderr:.4}");
        rows.push(SweepRow {
            value,
            fidelity,
            stderr,
            n_effective: trace.n_effective,
        });
    }
    let separation = if param == SweepParam::Chi {
        grid.iter()
            .map(|&v| (v, outcome_separation(v, &config.params)))
            .collect()
    } else {
        Vec::new()
    };
    Ok(SweepTable {
        param,
        readout_time: config.readout_time,
        rows,
        separation,
    })
}
