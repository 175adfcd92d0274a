//! Bang-bang feedback on single-qubit `sigma_x` rotations.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    named_state, pauli, qubit_mask, Axis, DensityMatrix, NamedState, PureState, QubitOperator, DIM, N_QUBITS,
};
use crate::cavity::CoherentAmplitudeSet;
use crate::engine::{check_filter_step, check_step, EngineKind, Generator, LocalDrive};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Resolution of `sgn(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRule {
    #[default]
    Zero,
    Positive,
}

impl FromStr for SignRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(SignRule::Zero),
            "positive" => Ok(SignRule::Positive),
            other => Err(Error::InvalidArgument(format!("unknown sign rule '{other}'"))),
        }
    }
}

/// Where the controller's state estimate comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    /// The estimate is the plant's own conditional state (ideal filter).
    Plant,
    /// A separate filter integrated from the measured current.
    Filter {
        engine: EngineKind,
        state: DensityMatrix,
        drive: FilterDrive,
    },
}

/// What drives a separate filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterDrive {
    /// Innovation reconstructed from the current with the filter's own mean.
    #[default]
    Innovation,
    /// The plant's Wiener increment, fed to the filter unchanged.
    SharedNoise,
}

impl FromStr for FilterDrive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "innovation" => Ok(FilterDrive::Innovation),
            "shared_noise" => Ok(FilterDrive::SharedNoise),
            other => Err(Error::InvalidArgument(format!("unknown filter drive '{other}'"))),
        }
    }
}

/// One step of measurement data for a separate filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub current: f64,
    /// Plant noise sample of the step.
    pub xi: f64,
    /// Use the positivity-preserving Kraus step instead of Euler-Maruyama.
    pub kraus: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackLaw {
    pub f_max: f64,
    pub target: PureState,
    pub sign_rule: SignRule,
    pub estimator: Estimator,
    /// Hold the coefficients for this many integrator steps.
    pub control_interval: u32,
    coefficients: [f64; N_QUBITS],
    held: u32,
}

impl FeedbackLaw {
    /// Controller targeting `|W->` that reads the plant state directly.
    pub fn new(f_max: f64) -> Self {
        FeedbackLaw {
            f_max,
            target: named_state(NamedState::WMinus),
            sign_rule: SignRule::Zero,
            estimator: Estimator::Plant,
            control_interval: 1,
            coefficients: [0.0; N_QUBITS],
            held: 0,
        }
    }

    pub fn with_target(mut self, target: PureState) -> Self {
        self.target = target;
        self
    }

    pub fn with_sign_rule(mut self, rule: SignRule) -> Self {
        self.sign_rule = rule;
        self
    }

    pub fn with_filter(mut self, engine: EngineKind, initial: DensityMatrix) -> Self {
        self.estimator = Estimator::Filter {
            engine,
            state: initial,
            drive: FilterDrive::Innovation,
        };
        self
    }

    /// No effect unless a separate filter is set.
    pub fn with_filter_drive(mut self, d: FilterDrive) -> Self {
        if let Estimator::Filter { drive, .. } = &mut self.estimator {
            *drive = d;
        }
        self
    }

    pub fn with_control_interval(mut self, steps: u32) -> Self {
        self.control_interval = steps.max(1);
        self
    }

    pub fn filter_engine(&self) -> Option<EngineKind> {
        match &self.estimator {
            Estimator::Plant => None,
            Estimator::Filter { engine, .. } => Some(*engine),
        }
    }

    pub fn filter_state(&self) -> Option<&DensityMatrix> {
        match &self.estimator {
            Estimator::Plant => None,
            Estimator::Filter { state, .. } => Some(state),
        }
    }

    /// Coefficients currently applied.
    pub fn coefficients(&self) -> [f64; N_QUBITS] {
        self.coefficients
    }

    /// Recomputes the coefficients from the estimate (`plant` is used when the
    /// estimator is [`Estimator::Plant`]) unless they are being held.
    pub fn control(&mut self, plant: &DensityMatrix) -> [f64; N_QUBITS] {
        if self.held == 0 {
            let estimate = match &self.estimator {
                Estimator::Plant => plant,
                Estimator::Filter { state, .. } => state,
            };
            let g = gradient_expectations(estimate, &self.target);
            self.coefficients = bang_bang_coefficients(g, self.f_max, self.sign_rule);
        }
        self.held = (self.held + 1) % self.control_interval.max(1);
        self.coefficients
    }

    /// Advances a separate filter one step, using `generator` for its
    /// dynamics and the coefficients applied during this step.
    pub fn advance_filter(
        &mut self,
        readout: Readout,
        generator: &Generator,
        extra_drive: &LocalDrive,
        dt: f64,
        step: u64,
    ) -> Result<()> {
        let drive = LocalDrive::sigma_x(self.coefficients).plus(*extra_drive);
        let Estimator::Filter { state, drive: input, .. } = &mut self.estimator else {
            return Ok(());
        };
        let ke = generator.kappa_eta();
        if ke <= 0.0 {
            return Err(Error::Config(
                "filter needs kappa * eta > 0 to reconstruct the innovation".into(),
            ));
        }
        match (*input, readout.kraus) {
            (FilterDrive::Innovation, true) => {
                let tr = generator.kraus_step_in_place(state, &drive, readout.current * dt / ke.sqrt(), dt);
                check_filter_step(state, tr, step)
            }
            (FilterDrive::Innovation, false) => {
                let xi_hat = (readout.current - ke * generator.signal(&state.0)) / ke.sqrt();
                let tr = generator.step_in_place(state, &drive, xi_hat * dt, dt);
                check_step(state, tr, dt, step)
            }
            (FilterDrive::SharedNoise, _) => {
                let tr = generator.step_in_place(state, &drive, readout.xi * dt, dt);
                check_step(state, tr, dt, step)
            }
        }
    }
}

/// `g_j = Tr(-i [rho_target, sigma_x_j] rho_hat) = 2 Im <t| sigma_x_j rho_hat |t>`.
pub fn gradient_expectations(rho_hat: &DensityMatrix, target: &PureState) -> [f64; N_QUBITS] {
    let t = target.amplitudes();
    let support: Vec<usize> = (0..DIM).filter(|&x| t[x] != Complex64::new(0.0, 0.0)).collect();
    let mut g = [0.0; N_QUBITS];
    for (j, gj) in g.iter_mut().enumerate() {
        let mask = qubit_mask(j + 1);
        // <t| sigma_x rho |t> = sum_{x, y} conj(t_x) rho_{x ^ mask, y} t_y
        let mut z = Complex64::new(0.0, 0.0);
        for &x in &support {
            let row: Complex64 = support.iter().map(|&y| rho_hat.0[(x ^ mask, y)] * t[y]).sum();
            z += t[x].conj() * row;
        }
        *gj = 2.0 * z.im;
    }
    g
}

pub fn bang_bang_coefficients(g: [f64; N_QUBITS], f_max: f64, rule: SignRule) -> [f64; N_QUBITS] {
    g.map(|v| {
        if v > 0.0 {
            f_max
        } else if v < 0.0 {
            -f_max
        } else {
            match rule {
                SignRule::Zero => 0.0,
                SignRule::Positive => f_max,
            }
        }
    })
}

/// `H_fb = sum_j f_j sigma_x_j`.
pub fn feedback_hamiltonian(f: [f64; N_QUBITS]) -> QubitOperator {
    let mut h = QubitOperator::zeros();
    for (j, fj) in f.iter().enumerate() {
        if *fj != 0.0 {
            h = h + pauli(j + 1, Axis::X).expect("qubit index in range").scale(*fj);
        }
    }
    h
}

/// One filter step driven by `measured_current`; the polaron filter uses the
/// supplied amplitudes.
pub fn filter_update(
    law: &mut FeedbackLaw,
    measured_current: f64,
    params: &SystemParams,
    amps: &CoherentAmplitudeSet,
    t: f64,
    dt: f64,
) -> Result<()> {
    let Some(engine) = law.filter_engine() else {
        return Err(Error::InvalidArgument(
            "feedback law has no separate filter".into(),
        ));
    };
    let generator = Generator::for_engine(engine, params, amps);
    let stray = if params.include_stray_drive {
        LocalDrive::stray(params, t)
    } else {
        LocalDrive::default()
    };
    let readout = Readout {
        current: measured_current,
        xi: 0.0,
        kraus: false,
    };
    law.advance_filter(readout, &generator, &stray, dt, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{commutator, fidelity};

    #[test]
    fn gradient_vanishes_on_stationary_points() {
        let target = named_state(NamedState::WMinus);
        for name in [NamedState::WMinus, NamedState::Ground] {
            let g = gradient_expectations(&named_state(name).projector(), &target);
            assert!(g.iter().all(|v| v.abs() < 1e-14), "{name}: {g:?}");
        }
    }

    #[test]
    fn gradient_matches_explicit_commutator() {
        let target = named_state(NamedState::WMinus);
        let rho = named_state(NamedState::SeparablePlus).projector();
        let g = gradient_expectations(&rho, &target);
        let rt = target.projector().0;
        for j in 1..=3 {
            let sx = pauli(j, Axis::X).unwrap().0;
            let v = (commutator(&rt, &sx) * Complex64::new(0.0, -1.0) * rho.0).trace();
            assert!(v.im.abs() < 1e-12);
            assert!((v.re - g[j - 1]).abs() < 1e-12);
        }
        assert!((g[0] - g[1]).abs() < 1e-12 && (g[1] - g[2]).abs() < 1e-12);
    }

    #[test]
    fn bang_bang_examples() {
        assert_eq!(bang_bang_coefficients([0.3, -0.2, 0.0], 2.0, SignRule::Zero), [2.0, -2.0, 0.0]);
        assert_eq!(bang_bang_coefficients([0.0; 3], 2.0, SignRule::Zero), [0.0; 3]);
        assert_eq!(bang_bang_coefficients([0.0; 3], 2.0, SignRule::Positive), [2.0; 3]);
        let g = [0.01, -3.0, 7.0];
        assert_eq!(
            bang_bang_coefficients(g, 2.0, SignRule::Zero),
            bang_bang_coefficients(g.map(|v| 10.0 * v), 2.0, SignRule::Zero)
        );
    }

    #[test]
    fn feedback_hamiltonian_examples() {
        assert_eq!(feedback_hamiltonian([0.0; 3]), QubitOperator::zeros());
        let h = feedback_hamiltonian([1.5, 0.0, 0.0]);
        assert!(h.is_hermitian(1e-15));
        let sq = h.clone() * h;
        assert_eq!(sq, QubitOperator::identity().scale(2.25));
    }

    #[test]
    fn control_interval_holds() {
        let mut law = FeedbackLaw::new(2.0).with_control_interval(3);
        let mut v = crate::algebra::Vector8::zeros();
        v[0b000] = Complex64::new(1.0, 0.0);
        v[0b100] = Complex64::new(0.0, 1.0);
        let tilted = PureState::new(v).unwrap().projector();
        let ground = named_state(NamedState::Ground).projector();
        let first = law.control(&tilted);
        assert_eq!(first, [-2.0; 3]);
        assert_eq!(law.control(&ground), first);
        assert_eq!(law.control(&ground), first);
        assert_eq!(law.control(&ground), [0.0; 3]);
    }

    #[test]
    fn feedback_increases_fidelity() {
        // dF/dt under -i[H_fb, rho] equals sum f_j g_j
        let target = named_state(NamedState::WMinus);
        let rho = named_state(NamedState::SeparablePlus).projector();
        let g = gradient_expectations(&rho, &target);
        let f = bang_bang_coefficients(g, 2.0, SignRule::Zero);
        let h = feedback_hamiltonian(f);
        let drho = commutator(&h.0, &rho.0) * Complex64::new(0.0, -1.0);
        let rate = DensityMatrix(drho).expectation(&QubitOperator(target.projector().0)).re;
        let expected: f64 = f.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
        assert!((rate - expected).abs() < 1e-12);
        assert!(expected >= 0.0);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        // F(theta) = <t| U rho U^dag |t>, U = exp(-i theta sigma_x_j); dF/dtheta = g_j
        let target = named_state(NamedState::WMinus);
        let mut v = crate::algebra::Vector8::zeros();
        for (x, z) in v.iter_mut().enumerate() {
            *z = Complex64::from_polar(1.0 + x as f64 * 0.1, 0.3 * x as f64);
        }
        let rho = PureState::new(v).unwrap().projector();
        let g = gradient_expectations(&rho, &target);
        let h = 1e-5;
        for j in 1..=3 {
            let sx = pauli(j, Axis::X).unwrap().0;
            let rotated = |theta: f64| {
                let u = QubitOperator::identity().0 * Complex64::new(theta.cos(), 0.0)
                    - sx * Complex64::new(0.0, theta.sin());
                fidelity(&DensityMatrix(u * rho.0 * u.adjoint()), &target)
            };
            let fd = (rotated(h) - rotated(-h)) / (2.0 * h);
            assert!((fd - g[j - 1]).abs() < 1e-8, "qubit {j}: {fd} vs {}", g[j - 1]);
        }
    }

    #[test]
    fn real_states_have_zero_gradient() {
        let target = named_state(NamedState::WMinus);
        for name in NamedState::ALL {
            let g = gradient_expectations(&named_state(name).projector(), &target);
            assert_eq!(g, [0.0; 3], "{name}");
        }
    }

    #[test]
    fn filter_needs_detector() {
        let p = SystemParams::default().with_eta(0.0);
        let amps = CoherentAmplitudeSet::vacuum(&p);
        let mut law = FeedbackLaw::new(2.0).with_filter(EngineKind::Adiabatic, DensityMatrix::maximally_mixed());
        assert!(matches!(
            filter_update(&mut law, 0.0, &p, &amps, 0.0, p.dt),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn matched_filter_reproduces_plant() {
        use crate::noise::NoiseProcess;
        let p = SystemParams::default();
        let amps = crate::cavity::steady_amplitudes(&p);
        let g = Generator::polaron(&p, &amps);
        let rho0 = named_state(NamedState::SeparablePlus).projector();
        for drive in [FilterDrive::Innovation, FilterDrive::SharedNoise] {
            let mut law = FeedbackLaw::new(2.0)
                .with_sign_rule(SignRule::Positive)
                .with_filter(EngineKind::Polaron, rho0)
                .with_filter_drive(drive);
            let mut plant = rho0;
            let mut noise = NoiseProcess::new(3, p.dt);
            let mut worst: f64 = 0.0;
            for n in 0..20_000 {
                let f = law.control(&plant);
                let xi = noise.sample();
                let current = g.current(&plant.0, xi);
                g.step_in_place(&mut plant, &LocalDrive::sigma_x(f), xi * p.dt, p.dt);
                let readout = Readout { current, xi, kraus: false };
                law.advance_filter(readout, &g, &LocalDrive::default(), p.dt, n).unwrap();
                worst = worst.max(law.filter_state().unwrap().distance(&plant));
            }
            assert!(worst < 1e-6, "{drive:?}: {worst}");
        }
    }
}
