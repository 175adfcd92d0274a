use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::derive_seed;
use crate::trajectory::{run_trajectory, TrajectoryConfig, TrajectoryRecord};

/// Fraction of failed trajectories that may be dropped silently.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    /// Per-trajectory settings; the seed is replaced for every member.
    pub template: TrajectoryConfig,
    pub n_trajectories: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
}

impl EnsembleSpec {
    pub fn new(template: TrajectoryConfig, n_trajectories: usize, master_seed: u64) -> Self {
        EnsembleSpec {
            template,
            n_trajectories,
            master_seed,
            workers: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFailure {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub label: String,
    /// Successful records in trajectory-index order.
    pub records: Vec<TrajectoryRecord>,
    pub failures: Vec<TrajectoryFailure>,
    pub n_requested: usize,
}

/// Ensemble-mean fidelity with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_effective: usize,
}

impl FidelityTrace {
    /// Mean and standard error at the stored time closest to `t`.
    pub fn at(&self, t: f64) -> Option<(f64, f64)> {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some((self.mean[i], self.stderr[i]))
    }

    /// Average of the mean fidelity over stored times in `[t0, t1]`.
    pub fn window_mean(&self, t0: f64, t1: f64) -> f64 {
        let v: Vec<f64> = self
            .times
            .iter()
            .zip(&self.mean)
            .filter(|(t, _)| **t >= t0 - 1e-9 && **t <= t1 + 1e-9)
            .map(|(_, f)| *f)
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }
}

/// Sample mean and `stddev / sqrt(n)` of `values`.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

impl Ensemble {
    pub fn n_effective(&self) -> usize {
        self.records.len()
    }

    pub fn fidelity_trace(&self) -> FidelityTrace {
        let times = self.records.first().map(|r| r.times.clone()).unwrap_or_default();
        let mut mean = Vec::with_capacity(times.len());
        let mut stderr = Vec::with_capacity(times.len());
        let mut column = Vec::with_capacity(self.records.len());
        for k in 0..times.len() {
            column.clear();
            column.extend(self.records.iter().map(|r| r.fidelity[k]));
            let (m, s) = mean_stderr(&column);
            mean.push(m);
            stderr.push(s);
        }
        FidelityTrace {
            times,
            mean,
            stderr,
            n_effective: self.records.len(),
        }
    }

    /// Per-trajectory time averages of the fidelity over `[t0, t1]`.
    pub fn window_fidelities(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| {
                let v: Vec<f64> = r
                    .times
                    .iter()
                    .zip(&r.fidelity)
                    .filter(|(t, _)| **t >= t0 - 1e-9 && **t <= t1 + 1e-9)
                    .map(|(_, f)| *f)
                    .collect();
                v.iter().sum::<f64>() / v.len().max(1) as f64
            })
            .collect()
    }
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Result<Ensemble> {
    if spec.n_trajectories == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one trajectory".into()));
    }
    spec.template.steps()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let outcomes: Vec<(usize, u64, Result<TrajectoryRecord>)> = pool.install(|| {
        (0..spec.n_trajectories)
            .into_par_iter()
            .map(|i| {
                let seed = spec.seed(i);
                let config = spec.template.clone().with_seed(seed);
                (i, seed, run_trajectory(&config))
            })
            .collect()
    });
    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (index, seed, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("trajectory {index} (seed {seed}) failed: {e}");
                failures.push(TrajectoryFailure {
                    index,
                    seed,
                    message: e.to_string(),
                })
            }
        }
    }
    if !failures.is_empty()
        && failures.len() as f64 >= MAX_FAILURE_FRACTION * spec.n_trajectories as f64
    {
        return Err(Error::EnsembleFailure {
            failed: failures.len(),
            total: spec.n_trajectories,
            first: failures[0].message.clone(),
        });
    }
    Ok(Ensemble {
        label: spec.template.initial_label.clone(),
        records,
        failures,
        n_requested: spec.n_trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::NamedState;
    use crate::feedback::FeedbackLaw;
    use crate::params::SystemParams;

    #[test]
    fn stderr_is_sample_std_over_root_n() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((s - sd / 2.0).abs() < 1e-15);
        assert_eq!(mean_stderr(&[0.3]), (0.3, 0.0));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let t = TrajectoryConfig::new(SystemParams::default(), NamedState::Ground)
            .with_controller(FeedbackLaw::new(2.0))
            .with_t_final(0.5);
        let a = run_ensemble(&EnsembleSpec::new(t.clone(), 4, 3).with_workers(1)).unwrap();
        let b = run_ensemble(&EnsembleSpec::new(t, 4, 3).with_workers(3)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.fidelity_trace(), b.fidelity_trace());
    }

    #[test]
    fn member_seed_is_independent_of_ensemble_size() {
        let t = TrajectoryConfig::new(SystemParams::default(), NamedState::SeparablePlus).with_t_final(0.2);
        let small = run_ensemble(&EnsembleSpec::new(t.clone(), 2, 11)).unwrap();
        let large = run_ensemble(&EnsembleSpec::new(t, 5, 11)).unwrap();
        assert_eq!(small.records[..], large.records[..2]);
    }

    #[test]
    fn widespread_failure_is_an_error() {
        let mut bad = crate::algebra::DensityMatrix::maximally_mixed();
        bad.0[(0, 1)] = num_complex::Complex64::new(f64::NAN, 0.0);
        let t = TrajectoryConfig::new(SystemParams::default(), NamedState::Ground)
            .with_initial_state(bad, "bad")
            .with_t_final(0.1);
        let e = run_ensemble(&EnsembleSpec::new(t, 3, 0)).unwrap_err();
        assert!(matches!(e, Error::EnsembleFailure { failed: 3, total: 3, .. }));
    }
}
