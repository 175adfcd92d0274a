use std::path::{Path, PathBuf};

use crate::algebra::{named_state, NamedState};
use crate::engine::EngineKind;
use crate::error::Result;
use crate::feedback::FeedbackLaw;
use crate::params::SystemParams;
use crate::trajectory::TrajectoryConfig;

use super::classify::{classify_and_average, theoretical_plateaus, CLASS_LABELS};
use super::config::{ExperimentConfig, Scenario};
use super::ensemble::{run_ensemble, Ensemble, EnsembleSpec, FidelityTrace};
use super::export::{
    write_classification, write_fidelity_csv, write_provenance, write_separation_csv, write_sweep_csv, write_table,
};
use super::oracle_check::{run_oracle_check, OracleCheckSettings};
use super::sweep::sweep;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub files: Vec<PathBuf>,
    /// Headline numbers, also echoed into the provenance sidecar.
    pub summary: Vec<(String, String)>,
}

/// Free evolution under measurement only.
pub fn free_trajectory(config: &ExperimentConfig, params: SystemParams, initial: NamedState) -> TrajectoryConfig {
    TrajectoryConfig::new(params, initial)
        .with_engine(config.engine)
        .with_t_final(config.t_final)
        .with_stride(config.stride)
}

/// Bang-bang feedback toward `|W->` with gain `params.f_max`.
pub fn feedback_trajectory(config: &ExperimentConfig, params: SystemParams, initial: NamedState) -> TrajectoryConfig {
    free_trajectory(config, params, initial)
        .with_controller(FeedbackLaw::new(params.f_max).with_sign_rule(config.sign_rule))
}

/// Feedback driven by an adiabatic-model filter while the plant follows
/// `config.engine`.
pub fn mismatched_trajectory(config: &ExperimentConfig, params: SystemParams, initial: NamedState) -> TrajectoryConfig {
    let law = FeedbackLaw::new(params.f_max)
        .with_sign_rule(config.sign_rule)
        .with_filter(EngineKind::Adiabatic, named_state(initial).projector())
        .with_filter_drive(config.filter_drive);
    free_trajectory(config, params, initial).with_controller(law)
}

fn ensemble(config: &ExperimentConfig, template: TrajectoryConfig) -> Result<Ensemble> {
    run_ensemble(
        &EnsembleSpec::new(template, config.n_trajectories, config.master_seed).with_workers(config.workers),
    )
}

/// Earliest stored time after which `a` stays above `b`.
pub fn crossover_time(a: &FidelityTrace, b: &FidelityTrace) -> Option<f64> {
    let n = a.mean.len().min(b.mean.len());
    let last_below = (0..n).rev().find(|&k| a.mean[k] <= b.mean[k]);
    match last_below {
        None => a.times.first().copied(),
        Some(k) if k + 1 < n => Some(a.times[k + 1]),
        Some(_) => None,
    }
}

struct Out<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
    summary: Vec<(String, String)>,
}

impl Out<'_> {
    fn trace(&mut self, name: &str, trace: &FidelityTrace) -> Result<()> {
        let path = self.dir.join(format!("{name}.csv"));
        write_fidelity_csv(&path, trace)?;
        self.files.push(path);
        Ok(())
    }

    fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let dir = config.output_path.as_path();
    let mut out = Out {
        dir,
        files: Vec::new(),
        summary: Vec::new(),
    };
    let window = (config.stabilized_from, config.t_final);
    match config.scenario {
        Scenario::MeasureOnly => {
            let e = ensemble(config, free_trajectory(config, config.params, config.initial_states[0]))?;
            let c = classify_and_average(&e.records, theoretical_plateaus(&config.params))?;
            out.files.extend(write_classification(dir, &c)?);
            for i in 0..4 {
                out.note(format!("count_{}", CLASS_LABELS[i]), c.counts[i]);
                out.note(format!("tail_current_{}", CLASS_LABELS[i]), c.tail_average(&c.class_current[i]));
            }
            out.note("unclassified", c.unclassified);
            out.note("failed", e.failures.len());
        }
        Scenario::Feedback | Scenario::NoFeedbackDecay => {
            for &s in &config.initial_states {
                let t = if config.scenario == Scenario::Feedback {
                    feedback_trajectory(config, config.params, s)
                } else {
                    free_trajectory(config, config.params, s)
                };
                let trace = ensemble(config, t)?.fidelity_trace();
                out.trace(&format!("fidelity_{s}"), &trace)?;
                out.note(format!("window_fidelity_{s}"), trace.window_mean(window.0, window.1));
            }
        }
        Scenario::SweepChi | Scenario::SweepEpsilon | Scenario::SweepF | Scenario::SweepEta => {
            let param = config.scenario.sweep_param().expect("sweep scenario");
            let table = sweep(config, param, &config.grid)?;
            let path = dir.join("sweep.csv");
            write_sweep_csv(&path, &table)?;
            out.files.push(path);
            if !table.separation.is_empty() {
                let path = dir.join("separation.csv");
                write_separation_csv(&path, &table)?;
                out.files.push(path);
            }
            for r in &table.rows {
                out.note(format!("fidelity_{}_{}", param, r.value), r.fidelity);
            }
        }
        Scenario::DecayRateSets => {
            let initial = config.initial_states[0];
            let mut rows = Vec::new();
            for (i, set) in config.gamma_sets.iter().enumerate() {
                let params = config.params.with_gammas(*set);
                let mean = params.with_gamma(params.mean_gamma());
                let fb = ensemble(config, feedback_trajectory(config, params, initial))?.fidelity_trace();
                let free = ensemble(config, free_trajectory(config, params, NamedState::WMinus))?.fidelity_trace();
                let homog = ensemble(config, feedback_trajectory(config, mean, initial))?.fidelity_trace();
                out.trace(&format!("decay_set_{i}_feedback"), &fb)?;
                out.trace(&format!("decay_set_{i}_no_feedback"), &free)?;
                out.trace(&format!("decay_set_{i}_mean_gamma"), &homog)?;
                let cross = crossover_time(&fb, &free).unwrap_or(f64::NAN);
                rows.push(vec![
                    i as f64,
                    set[0],
                    set[1],
                    set[2],
                    params.mean_gamma(),
                    fb.window_mean(window.0, window.1),
                    homog.window_mean(window.0, window.1),
                    cross,
                ]);
                out.note(format!("crossover_set_{i}"), cross);
            }
            let path = dir.join("decay_sets.csv");
            write_table(
                &path,
                &[
                    "set",
                    "gamma_1_per_kappa",
                    "gamma_2_per_kappa",
                    "gamma_3_per_kappa",
                    "mean_gamma_per_kappa",
                    "stabilized_fidelity",
                    "stabilized_fidelity_mean_gamma",
                    "crossover_time_per_kappa",
                ],
                &rows,
            )?;
            out.files.push(path);
        }
        Scenario::FilterMismatch => {
            let s = config.initial_states[0];
            let e = ensemble(config, mismatched_trajectory(config, config.params, s))?;
            let trace = e.fidelity_trace();
            out.trace("fidelity_filter_mismatch", &trace)?;
            out.note("window_fidelity", trace.window_mean(window.0, window.1));
        }
        Scenario::OracleCheck => {
            let report = run_oracle_check(&OracleCheckSettings::from_config(config))?;
            let a = &report.amplitude;
            let rows: Vec<Vec<f64>> = (0..a.times.len())
                .map(|k| {
                    let mut r = vec![a.times[k]];
                    for x in 0..8 {
                        r.extend([a.oracle_amplitudes[k][x].re, a.oracle_amplitudes[k][x].im]);
                        r.extend([a.model_amplitudes[k][x].re, a.model_amplitudes[k][x].im]);
                    }
                    r
                })
                .collect();
            let mut header = vec!["time_per_kappa".to_string()];
            for x in 0..8 {
                for w in ["oracle_re", "oracle_im", "model_re", "model_im"] {
                    header.push(format!("alpha_{x:03b}_{w}"));
                }
            }
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let path = dir.join("oracle_amplitudes.csv");
            write_table(&path, &header, &rows)?;
            out.files.push(path);

            let u = &report.unconditional;
            let rows: Vec<Vec<f64>> = (0..u.times.len())
                .map(|k| vec![u.times[k], u.oracle_w_minus[k], u.model_w_minus[k], u.gaps[k]])
                .collect();
            let path = dir.join("oracle_unconditional.csv");
            write_table(
                &path,
                &["time_per_kappa", "oracle_w_minus_fidelity", "model_w_minus_fidelity", "max_gap"],
                &rows,
            )?;
            out.files.push(path);

            let p = &report.plateau;
            let mut rows: Vec<Vec<f64>> = (0..4)
                .map(|c| vec![-1.0, c as f64, p.class_signal[c], p.model_plateaus[c], p.class_relative_error[c]])
                .collect();
            rows.extend(p.conditional.iter().enumerate().map(|(i, c)| {
                vec![i as f64, c.class as f64, c.tail_signal, p.model_plateaus[c.class], c.relative_error]
            }));
            let path = dir.join("oracle_plateaus.csv");
            write_table(
                &path,
                &["trajectory", "class", "oracle_signal", "model_plateau", "relative_error"],
                &rows,
            )?;
            out.files.push(path);
            out.note("n_fock", report.n_fock);
            out.note("amplitude_max_error", a.max_error);
            out.note("unconditional_max_gap", u.max_gap);
            out.note("plateau_max_relative_error", p.max_relative_error);
            out.note("max_top_population", p.max_top_population);
        }
    }
    let prov = write_provenance(dir, config, &out.files, &out.summary)?;
    out.files.push(prov);
    Ok(ExperimentOutput {
        files: out.files,
        summary: out.summary,
    })
}
