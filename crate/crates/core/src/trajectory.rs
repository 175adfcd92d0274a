use serde::{Deserialize, Serialize};

use crate::algebra::{fidelity, named_state, DensityMatrix, NamedState, PureState, N_QUBITS};
use crate::cavity::{evolve_amplitudes, steady_amplitudes, CoherentAmplitudeSet};
use crate::engine::{check_step, EngineKind, Generator, LocalDrive};
use crate::error::{Error, Result};
use crate::feedback::{Estimator, FeedbackLaw, Readout};
use crate::noise::NoiseProcess;
use crate::params::SystemParams;

/// Amplitude change per step below which the generator is no longer rebuilt.
const AMPLITUDE_FREEZE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeStart {
    #[default]
    Vacuum,
    Steady,
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub params: SystemParams,
    pub engine: EngineKind,
    pub initial: DensityMatrix,
    pub initial_label: String,
    /// Fidelity reference; the controller's target when one is present.
    pub target: PureState,
    pub controller: Option<FeedbackLaw>,
    pub t_final: f64,
    pub seed: u64,
    pub stride: usize,
    pub amplitude_start: AmplitudeStart,
    /// Draw the noise as the `2^levels`-fold refinement of a coarser path.
    pub noise_refinement: u32,
    /// Keep the conditional state at every record time.
    pub record_states: bool,
}

impl TrajectoryConfig {
    pub fn new(params: SystemParams, initial: NamedState) -> Self {
        TrajectoryConfig {
            params,
            engine: EngineKind::Polaron,
            initial: named_state(initial).projector(),
            initial_label: initial.to_string(),
            target: named_state(NamedState::WMinus),
            controller: None,
            t_final: 10.0,
            seed: 0,
            stride: 100,
            amplitude_start: AmplitudeStart::Vacuum,
            noise_refinement: 0,
            record_states: false,
        }
    }

    pub fn with_engine(mut self, engine: EngineKind) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_controller(mut self, law: FeedbackLaw) -> Self {
        self.target = law.target;
        self.controller = Some(law);
        self
    }

    pub fn with_t_final(mut self, t: f64) -> Self {
        self.t_final = t;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_amplitude_start(mut self, start: AmplitudeStart) -> Self {
        self.amplitude_start = start;
        self
    }

    pub fn with_noise_refinement(mut self, levels: u32) -> Self {
        self.noise_refinement = levels;
        self
    }

    pub fn with_recorded_states(mut self, on: bool) -> Self {
        self.record_states = on;
        self
    }

    pub fn with_initial_state(mut self, rho: DensityMatrix, label: impl Into<String>) -> Self {
        self.initial = rho;
        self.initial_label = label.into();
        self
    }

    pub fn steps(&self) -> Result<u64> {
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        let n = (self.t_final / self.params.dt).round();
        if n < 1.0 || ((n * self.params.dt) - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "t_final = {} is not a whole number of steps of dt = {}",
                self.t_final, self.params.dt
            )));
        }
        let n = n as u64;
        if self.stride == 0 || n % self.stride as u64 != 0 {
            return Err(Error::InvalidArgument(format!(
                "stride {} does not divide {n} steps",
                self.stride
            )));
        }
        Ok(n)
    }
}

/// Homodyne current sampled at the record times, averaged over each stride.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HomodyneRecord {
    pub times: Vec<f64>,
    pub current: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub params: SystemParams,
    pub engine: EngineKind,
    pub initial_label: String,
    pub seed: u64,
    pub stride: usize,
    pub initial_fidelity: f64,
    /// Record times `k * stride * dt`, `k >= 1`.
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// Noiseless `<c_0 + c_0^dag>` of the conditional state.
    pub outcome: Vec<f64>,
    pub feedback: Vec<[f64; N_QUBITS]>,
    pub homodyne: HomodyneRecord,
    pub final_state: DensityMatrix,
    /// Conditional states at `times`; empty unless requested.
    pub states: Vec<DensityMatrix>,
    pub min_eigenvalue: f64,
    /// Largest entrywise distance between a separate filter and the plant.
    pub max_filter_deviation: Option<f64>,
}

impl TrajectoryRecord {
    pub fn final_fidelity(&self) -> f64 {
        self.fidelity.last().copied().unwrap_or(self.initial_fidelity)
    }

    /// Mean of the outcome over records with `t >= t_final - window`.
    pub fn outcome_tail_mean(&self, fraction: f64) -> f64 {
        let t_end = self.times.last().copied().unwrap_or(0.0);
        let start = t_end * (1.0 - fraction);
        let tail: Vec<f64> = self
            .times
            .iter()
            .zip(self.outcome.iter())
            .filter(|(t, _)| **t >= start - 1e-12)
            .map(|(_, o)| *o)
            .collect();
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }
}

fn stray(params: &SystemParams, t: f64) -> LocalDrive {
    if params.include_stray_drive {
        LocalDrive::stray(params, t)
    } else {
        LocalDrive::default()
    }
}

pub fn run_trajectory(config: &TrajectoryConfig) -> Result<TrajectoryRecord> {
    let params = config.params;
    params.validate()?;
    let n_steps = config.steps()?;
    let dt = params.dt;
    let stride = config.stride;

    let mut controller = config.controller.clone();
    let filter_engine = controller.as_ref().and_then(|c| c.filter_engine());
    let needs_amplitudes =
        config.engine == EngineKind::Polaron || filter_engine == Some(EngineKind::Polaron);

    let mut amps = match config.amplitude_start {
        AmplitudeStart::Vacuum => CoherentAmplitudeSet::vacuum(&params),
        AmplitudeStart::Steady => steady_amplitudes(&params),
    };
    let mut frozen = !needs_amplitudes || config.amplitude_start == AmplitudeStart::Steady;
    let mut plant = Generator::for_engine(config.engine, &params, &amps);
    let separate_filter = filter_engine.filter(|e| *e != config.engine);
    let mut filter_gen = separate_filter.map(|e| Generator::for_engine(e, &params, &amps));

    let mut noise = NoiseProcess::refined(config.seed, dt, config.noise_refinement);
    let mut rho = config.initial;
    let n_records = (n_steps / stride as u64) as usize;
    let mut rec = TrajectoryRecord {
        params,
        engine: config.engine,
        initial_label: config.initial_label.clone(),
        seed: config.seed,
        stride,
        initial_fidelity: fidelity(&rho, &config.target),
        times: Vec::with_capacity(n_records),
        fidelity: Vec::with_capacity(n_records),
        outcome: Vec::with_capacity(n_records),
        feedback: Vec::with_capacity(n_records),
        homodyne: HomodyneRecord::default(),
        final_state: rho,
        states: Vec::new(),
        min_eigenvalue: rho.min_eigenvalue(),
        max_filter_deviation: filter_engine.map(|_| 0.0),
    };
    rec.homodyne.times.reserve(n_records);
    rec.homodyne.current.reserve(n_records);

    let mut current_acc = 0.0;
    let mut f = [0.0; N_QUBITS];
    for n in 0..n_steps {
        let t = n as f64 * dt;
        if let Some(c) = controller.as_mut() {
            f = c.control(&rho);
        }
        let extra = stray(&params, t);
        let drive = LocalDrive::sigma_x(f).plus(extra);
        let xi = noise.sample();
        let current = plant.current(&rho.0, xi);
        current_acc += current;

        let tr = plant.step_in_place(&mut rho, &drive, xi * dt, dt);
        check_step(&rho, tr, dt, n)?;

        if let Some(c) = controller.as_mut() {
            if matches!(c.estimator, Estimator::Filter { .. }) {
                let g = filter_gen.as_ref().unwrap_or(&plant);
                let readout = Readout {
                    current,
                    xi,
                    kraus: separate_filter.is_some(),
                };
                c.advance_filter(readout, g, &extra, dt, n)?;
                if let (Some(est), Some(dev)) = (c.filter_state(), rec.max_filter_deviation.as_mut()) {
                    *dev = dev.max(est.distance(&rho));
                }
            }
        }

        if !frozen {
            let next = evolve_amplitudes(&amps, &params, dt);
            frozen = next.distance(&amps) < AMPLITUDE_FREEZE_TOL;
            amps = next;
            plant = Generator::for_engine(config.engine, &params, &amps);
            if let Some(e) = separate_filter {
                filter_gen = Some(Generator::for_engine(e, &params, &amps));
            }
        }

        if (n + 1) % stride as u64 == 0 {
            let t_rec = (n + 1) as f64 * dt;
            rec.times.push(t_rec);
            rec.fidelity.push(fidelity(&rho, &config.target));
            rec.outcome.push(plant.outcome(&rho.0));
            rec.feedback.push(f);
            rec.homodyne.times.push(t_rec);
            rec.homodyne.current.push(current_acc / stride as f64);
            current_acc = 0.0;
            rec.min_eigenvalue = rec.min_eigenvalue.min(rho.min_eigenvalue());
            if config.record_states {
                rec.states.push(rho);
            }
        }
    }
    if rec.min_eigenvalue < -1e-6 {
        log::debug!(
            "seed {}: most negative eigenvalue {:.3e}",
            config.seed,
            rec.min_eigenvalue
        );
    }
    rec.final_state = rho;
    Ok(rec)
}

/// Entrywise distance between same-seed polaron and adiabatic runs of
/// `config`, at each record time.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineComparison {
    pub times: Vec<f64>,
    pub distance: Vec<f64>,
    pub max_distance: f64,
}

pub fn compare_engines(config: &TrajectoryConfig) -> Result<EngineComparison> {
    let base = config.clone().with_recorded_states(true);
    let a = run_trajectory(&base.clone().with_engine(EngineKind::Polaron))?;
    let b = run_trajectory(&base.with_engine(EngineKind::Adiabatic))?;
    let distance: Vec<f64> = a.states.iter().zip(&b.states).map(|(x, y)| x.distance(y)).collect();
    Ok(EngineComparison {
        times: a.times,
        max_distance: distance.iter().copied().fold(0.0, f64::max),
        distance,
    })
}
