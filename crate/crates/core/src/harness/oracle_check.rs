use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{excitations, fidelity, named_state, DensityMatrix, NamedState, DIM};
use crate::cavity::{evolve_amplitudes, CoherentAmplitudeSet};
use crate::engine::unconditional_step;
use crate::error::Result;
use crate::noise::derive_seed;
use crate::oracle::{min_fock_dimension, run_oracle, JointIntegrator, OracleRun};
use crate::params::SystemParams;

use super::classify::{theoretical_plateaus, TAIL_FRACTION};
use super::config::ExperimentConfig;

/// Basis representatives of the four outcome classes, in plateau order.
pub const CLASS_REPRESENTATIVES: [usize; 4] = [0b111, 0b011, 0b001, 0b000];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckSettings {
    pub params: SystemParams,
    pub n_fock: usize,
    /// Step of the noise-averaged runs.
    pub deterministic_dt: f64,
    pub frozen_t_final: f64,
    pub unconditional_t_final: f64,
    pub conditional_dt: f64,
    pub conditional_t_final: f64,
    pub n_conditional: usize,
    pub master_seed: u64,
    pub workers: usize,
}

impl OracleCheckSettings {
    pub fn new(params: SystemParams) -> Self {
        let mut params = params;
        params.include_stray_drive = false;
        OracleCheckSettings {
            params,
            n_fock: min_fock_dimension(&params),
            deterministic_dt: 1e-3,
            frozen_t_final: 15.0,
            unconditional_t_final: 20.0,
            conditional_dt: 1e-4,
            conditional_t_final: 20.0,
            n_conditional: 4,
            master_seed: 1,
            workers: 0,
        }
    }

    pub fn from_config(config: &ExperimentConfig) -> Self {
        let mut s = OracleCheckSettings::new(config.params);
        if config.n_fock > 0 {
            s.n_fock = config.n_fock;
        }
        s.unconditional_t_final = config.t_final;
        s.conditional_dt = config.oracle_dt;
        s.conditional_t_final = config.oracle_t_final;
        s.n_conditional = config.oracle_trajectories;
        s.master_seed = config.master_seed;
        s.workers = config.workers;
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeCheck {
    pub times: Vec<f64>,
    /// Largest `|<a>_x - alpha_x|` over time, per basis state.
    pub per_state_error: [f64; DIM],
    pub max_error: f64,
    /// Oracle signal `2 Re(e^{-i phi} <a>_x)` per class, tail-averaged.
    pub class_signal: [f64; 4],
    pub oracle_amplitudes: Vec<[Complex64; DIM]>,
    pub model_amplitudes: Vec<[Complex64; DIM]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnconditionalCheck {
    pub times: Vec<f64>,
    /// Largest fidelity or population difference at each stored time.
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub oracle_w_minus: Vec<f64>,
    pub model_w_minus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPlateau {
    pub seed: u64,
    pub tail_signal: f64,
    pub class: usize,
    pub relative_error: f64,
    /// Final reduced-state population of the class's excitation sector.
    pub sector_population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauCheck {
    pub model_plateaus: [f64; 4],
    pub class_signal: [f64; 4],
    pub class_relative_error: [f64; 4],
    pub conditional: Vec<ConditionalPlateau>,
    pub max_relative_error: f64,
    pub max_top_population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckReport {
    pub n_fock: usize,
    pub amplitude: AmplitudeCheck,
    pub unconditional: UnconditionalCheck,
    pub plateau: PlateauCheck,
}

/// Qubits maximally mixed and frozen (no decay, no detector): each diagonal
/// block holds the coherent state driven by its own dispersive shift.
pub fn frozen_amplitude_check(s: &OracleCheckSettings) -> Result<AmplitudeCheck> {
    let params = s.params.with_gamma(0.0).with_eta(0.0);
    let stride = (1.0 / s.deterministic_dt).round().max(1.0) as usize / 10;
    let rec = run_oracle(&OracleRun {
        params,
        n_fock: s.n_fock,
        initial: DensityMatrix::maximally_mixed(),
        t_final: s.frozen_t_final,
        dt: s.deterministic_dt,
        stride: stride.max(1),
        seed: 0,
        integrator: JointIntegrator::Rk4,
    })?;
    let mut amps = CoherentAmplitudeSet::vacuum(&params);
    let mut model = Vec::with_capacity(rec.times.len());
    let mut t = 0.0;
    for &tr in &rec.times {
        while t < tr - 0.5 * s.deterministic_dt {
            amps = evolve_amplitudes(&amps, &params, s.deterministic_dt);
            t += s.deterministic_dt;
        }
        model.push(*amps.alphas());
    }
    let oracle: Vec<[Complex64; DIM]> = rec
        .conditional_amplitudes
        .iter()
        .map(|a| std::array::from_fn(|x| a[x].unwrap_or_default()))
        .collect();
    let mut per_state_error = [0.0f64; DIM];
    for (o, m) in oracle.iter().zip(&model) {
        for x in 0..DIM {
            per_state_error[x] = per_state_error[x].max((o[x] - m[x]).norm());
        }
    }
    let phase = Complex64::from_polar(1.0, -params.phi);
    let t_end = rec.times.last().copied().unwrap_or(0.0);
    let tail: Vec<usize> = (0..rec.times.len())
        .filter(|&k| rec.times[k] >= t_end * (1.0 - TAIL_FRACTION) - 1e-12)
        .collect();
    let class_signal = CLASS_REPRESENTATIVES.map(|x| {
        tail.iter().map(|&k| 2.0 * (phase * oracle[k][x]).re).sum::<f64>() / tail.len() as f64
    });
    Ok(AmplitudeCheck {
        times: rec.times,
        max_error: per_state_error.iter().copied().fold(0.0, f64::max),
        per_state_error,
        class_signal,
        oracle_amplitudes: oracle,
        model_amplitudes: model,
    })
}

/// Noise-averaged reduced qubit dynamics against the unconditional effective
/// model, both from `|psi_i>` with the cavity in vacuum.
pub fn unconditional_check(s: &OracleCheckSettings) -> Result<UnconditionalCheck> {
    let params = s.params;
    let dt = s.deterministic_dt;
    let stride = (1.0 / dt).round().max(1.0) as usize;
    let initial = named_state(NamedState::SeparablePlus).projector();
    let rec = run_oracle(&OracleRun {
        params,
        n_fock: s.n_fock,
        initial,
        t_final: s.unconditional_t_final,
        dt,
        stride,
        seed: 0,
        integrator: JointIntegrator::Rk4,
    })?;
    let mut rho = initial;
    let mut amps = CoherentAmplitudeSet::vacuum(&params);
    let mut gaps = Vec::with_capacity(rec.times.len());
    let mut oracle_w = Vec::with_capacity(rec.times.len());
    let mut model_w = Vec::with_capacity(rec.times.len());
    let w = named_state(NamedState::WMinus);
    let mut step = 0usize;
    for (k, &tr) in rec.times.iter().enumerate() {
        while (step as f64) * dt < tr - 0.5 * dt {
            rho = unconditional_step(&rho, &amps, &params, step as f64 * dt, dt)?;
            amps = evolve_amplitudes(&amps, &params, dt);
            step += 1;
        }
        let o = &rec.reduced[k];
        let mut gap: f64 = 0.0;
        for named in NamedState::ALL {
            let t = named_state(named);
            gap = gap.max((fidelity(o, &t) - fidelity(&rho, &t)).abs());
        }
        for x in 0..DIM {
            gap = gap.max((o.0[(x, x)].re - rho.0[(x, x)].re).abs());
        }
        gaps.push(gap);
        oracle_w.push(fidelity(o, &w));
        model_w.push(fidelity(&rho, &w));
    }
    Ok(UnconditionalCheck {
        times: rec.times,
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        gaps,
        oracle_w_minus: oracle_w,
        model_w_minus: model_w,
    })
}

/// Per-class oracle signals from the frozen run plus a few conditional
/// trajectories from `|psi_i>`, each compared with its nearest plateau.
pub fn plateau_check(s: &OracleCheckSettings, frozen: &AmplitudeCheck) -> Result<PlateauCheck> {
    let params = s.params.with_gamma(0.0).with_eta(1.0);
    let model = theoretical_plateaus(&params);
    let class_relative_error: [f64; 4] =
        std::array::from_fn(|c| ((frozen.class_signal[c] - model[c]) / model[c]).abs());
    let stride = ((0.1 / s.conditional_dt).round() as usize).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers)
        .build()
        .map_err(|e| crate::error::Error::Config(format!("cannot build worker pool: {e}")))?;
    let runs: Vec<Result<(u64, crate::oracle::OracleRecord)>> = pool.install(|| {
        (0..s.n_conditional)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(s.master_seed, i as u64);
                run_oracle(&OracleRun {
                    params,
                    n_fock: s.n_fock,
                    initial: named_state(NamedState::SeparablePlus).projector(),
                    t_final: s.conditional_t_final,
                    dt: s.conditional_dt,
                    stride,
                    seed,
                    integrator: JointIntegrator::EulerMaruyama,
                })
                .map(|r| (seed, r))
            })
            .collect()
    });
    let mut conditional = Vec::with_capacity(runs.len());
    let mut max_top: f64 = 0.0;
    for run in runs {
        let (seed, rec) = run?;
        max_top = max_top.max(rec.max_top_population);
        let t_end = rec.times.last().copied().unwrap_or(0.0);
        let tail: Vec<f64> = rec
            .times
            .iter()
            .zip(&rec.signal)
            .filter(|(t, _)| **t >= t_end * (1.0 - TAIL_FRACTION) - 1e-12)
            .map(|(_, v)| *v)
            .collect();
        let tail_signal = tail.iter().sum::<f64>() / tail.len() as f64;
        let (class, _) = model
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (tail_signal - p).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four plateaus");
        let sector = 3 - class as u32;
        let last = rec.reduced.last().expect("at least one record");
        let sector_population = (0..DIM)
            .filter(|&x| excitations(x) == sector)
            .map(|x| last.0[(x, x)].re)
            .sum();
        conditional.push(ConditionalPlateau {
            seed,
            tail_signal,
            class,
            relative_error: ((tail_signal - model[class]) / model[class]).abs(),
            sector_population,
        });
    }
    let max_relative_error = class_relative_error
        .iter()
        .copied()
        .chain(conditional.iter().map(|c| c.relative_error))
        .fold(0.0, f64::max);
    Ok(PlateauCheck {
        model_plateaus: model,
        class_signal: frozen.class_signal,
        class_relative_error,
        conditional,
        max_relative_error,
        max_top_population: max_top,
    })
}

pub fn run_oracle_check(s: &OracleCheckSettings) -> Result<OracleCheckReport> {
    let amplitude = frozen_amplitude_check(s)?;
    let unconditional = unconditional_check(s)?;
    let plateau = plateau_check(s, &amplitude)?;
    Ok(OracleCheckReport {
        n_fock: s.n_fock,
        amplitude,
        unconditional,
        plateau,
    })
}
