//! Cavity coherent amplitudes and the joint dispersive measurement they define.
//!
//! For each logical state `|x>` the cavity sits in a coherent state `alpha_x`
//! obeying `d alpha_x/dt = -i chi_x alpha_x - i epsilon - kappa alpha_x / 2`
//! (drive resonant with the cavity). Everything the qubit-only equations need,
//! i.e. measurement operators, dephasing and Stark matrices, follows from the
//! eight amplitudes.

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::algebra::{excitations, z_total, QubitOperator, DIM};
use crate::error::{Error, Result};
use crate::params::SystemParams;

pub type RealMatrix8 = SMatrix<f64, DIM, DIM>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance on imaginary parts of the signed root rates once steady.
pub const ROOT_IMAG_TOL: f64 = 1e-9;

/// `chi_x = <x| sum_j chi sigma_z_j |x>`.
pub fn dispersive_shift(x: usize, chi: f64) -> f64 {
    chi * z_total(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitudeSet {
    alpha: [Complex64; DIM],
    chi_x: [f64; DIM],
}

impl CoherentAmplitudeSet {
    pub fn new(alpha: [Complex64; DIM], chi: f64) -> Self {
        let mut chi_x = [0.0; DIM];
        for (x, c) in chi_x.iter_mut().enumerate() {
            *c = dispersive_shift(x, chi);
        }
        CoherentAmplitudeSet { alpha, chi_x }
    }

    pub fn vacuum(params: &SystemParams) -> Self {
        Self::new([Complex64::new(0.0, 0.0); DIM], params.chi)
    }

    /// Same amplitude `alpha` for every logical state (the bad-cavity limit).
    pub fn uniform(alpha: Complex64, chi: f64) -> Self {
        Self::new([alpha; DIM], chi)
    }

    pub fn alpha(&self, x: usize) -> Complex64 {
        self.alpha[x]
    }

    pub fn alphas(&self) -> &[Complex64; DIM] {
        &self.alpha
    }

    pub fn chi_x(&self, x: usize) -> f64 {
        self.chi_x[x]
    }

    pub fn max_modulus(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &CoherentAmplitudeSet) -> f64 {
        self.alpha
            .iter()
            .zip(other.alpha.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn amplitude_derivative(alpha_x: Complex64, chi_x: f64, params: &SystemParams) -> Complex64 {
    -I * chi_x * alpha_x - I * params.epsilon - 0.5 * params.kappa * alpha_x
}

pub fn steady_amplitude(chi_x: f64, params: &SystemParams) -> Complex64 {
    -I * params.epsilon / (I * chi_x + 0.5 * params.kappa)
}

pub fn steady_amplitudes(params: &SystemParams) -> CoherentAmplitudeSet {
    let mut alpha = [Complex64::new(0.0, 0.0); DIM];
    for (x, a) in alpha.iter_mut().enumerate() {
        *a = steady_amplitude(dispersive_shift(x, params.chi), params);
    }
    CoherentAmplitudeSet::new(alpha, params.chi)
}

/// One classical RK4 step of the amplitude ODE for all eight states.
pub fn evolve_amplitudes(
    state: &CoherentAmplitudeSet,
    params: &SystemParams,
    dt: f64,
) -> CoherentAmplitudeSet {
    let mut next = *state;
    for x in 0..DIM {
        let c = state.chi_x[x];
        let a = state.alpha[x];
        let f = |z: Complex64| amplitude_derivative(z, c, params);
        let k1 = f(a);
        let k2 = f(a + 0.5 * dt * k1);
        let k3 = f(a + 0.5 * dt * k2);
        let k4 = f(a + dt * k3);
        next.alpha[x] = a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    next
}

/// Sign `(-1)^{a.b}` with `b` the bitwise complement of `x`: the eigenvalue of
/// the Pauli string `Z^a` on `|x>`.
#[inline]
fn string_sign(a: usize, x: usize) -> f64 {
    let flips = (a & !x & (DIM - 1)).count_ones();
    if flips % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Pauli-string coefficients of `sum_x alpha_x Pi_x`, scaled so that
/// `sum_x alpha_x Pi_x = (1/2) sum_a beta_a Z^a`. Index `a` encodes `(i,j,k)`
/// with qubit 1 as the most significant bit.
pub fn beta_coefficients(amps: &CoherentAmplitudeSet) -> [Complex64; DIM] {
    let mut beta = [Complex64::new(0.0, 0.0); DIM];
    for (a, b) in beta.iter_mut().enumerate() {
        let s: Complex64 = (0..DIM).map(|x| amps.alpha[x] * string_sign(a, x)).sum();
        *b = 0.25 * s;
    }
    beta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRate {
    /// `|beta|^2 cos^2(phi - theta)`; the physical rate is `kappa eta` times this.
    pub rate: f64,
    /// `arg(beta)`.
    pub theta: f64,
}

pub fn measurement_rates(beta: &[Complex64; DIM], phi: f64) -> [MeasurementRate; DIM] {
    let mut out = [MeasurementRate { rate: 0.0, theta: 0.0 }; DIM];
    for (o, b) in out.iter_mut().zip(beta.iter()) {
        let theta = b.arg();
        *o = MeasurementRate {
            rate: b.norm_sqr() * (phi - theta).cos().powi(2),
            theta,
        };
    }
    out
}

/// Signed root of `Gamma_a(phi)`: `|beta| cos(phi - theta) = Re(beta e^{-i phi})`.
fn signed_root(beta: Complex64, phi: f64) -> f64 {
    (beta * Complex64::from_polar(1.0, -phi)).re
}

fn pauli_string_operator(coeffs: &[f64; DIM]) -> QubitOperator {
    let mut diag = [Complex64::new(0.0, 0.0); DIM];
    for (x, d) in diag.iter_mut().enumerate() {
        let v: f64 = (0..DIM).map(|a| coeffs[a] * string_sign(a, x)).sum();
        *d = Complex64::new(0.5 * v, 0.0);
    }
    QubitOperator::diagonal(&diag)
}

/// Measurement operators and derived matrices at a given amplitude set.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    pub phi: f64,
    pub beta: [Complex64; DIM],
    pub rates: [MeasurementRate; DIM],
    pub c_phi: QubitOperator,
    pub c_phi_minus_half_pi: QubitOperator,
    /// Signed root rates at `phi = 0`, as amplitude combinations. Complex in
    /// general; real once the amplitudes are permutation symmetric.
    pub sqrt_gamma0: Complex64,
    pub sqrt_gamma1: Complex64,
    pub sqrt_gamma2: Complex64,
    /// `Gamma_d^{xy} = (chi_x - chi_y) Im(alpha_x alpha_y^*)`.
    pub dephasing: RealMatrix8,
    /// `A_c^{xy} = (chi_x - chi_y) Re(alpha_x alpha_y^*)`.
    pub stark: RealMatrix8,
}

impl MeasurementModel {
    /// Diagonal of `c_phi - i c_{phi - pi/2} = sum_x alpha_x e^{-i phi} Pi_x`
    /// (up to an identity shift that cancels in every superoperator).
    pub fn jump_diagonal(&self) -> [Complex64; DIM] {
        let mut d = [Complex64::new(0.0, 0.0); DIM];
        for (x, v) in d.iter_mut().enumerate() {
            *v = self.c_phi.0[(x, x)] - I * self.c_phi_minus_half_pi.0[(x, x)];
        }
        d
    }

    /// Diagonal of `c_phi + c_phi^dag`, the noiseless normalized signal per state.
    pub fn signal_diagonal(&self) -> [f64; DIM] {
        let mut s = [0.0; DIM];
        for (x, v) in s.iter_mut().enumerate() {
            *v = 2.0 * self.c_phi.0[(x, x)].re;
        }
        s
    }

    /// Outcomes of `<c_0 + c_0^dag>` for `|111>`, the double-excitation
    /// states, the single-excitation states and `|000>`, in that order.
    pub fn outcome_plateaus(&self) -> [f64; 4] {
        let g0 = self.sqrt_gamma0.re;
        let g1 = self.sqrt_gamma1.re;
        [3.0 * g0 - g1, g0 + g1, -g0 - g1, -3.0 * g0 + g1]
    }

    pub fn max_root_imaginary(&self) -> f64 {
        [self.sqrt_gamma0, self.sqrt_gamma1, self.sqrt_gamma2]
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}

pub fn build_measurement_operators(
    amps: &CoherentAmplitudeSet,
    params: &SystemParams,
) -> MeasurementModel {
    let phi = params.phi;
    let beta = beta_coefficients(amps);
    let rates = measurement_rates(&beta, phi);
    let mut roots = [0.0; DIM];
    let mut roots_quad = [0.0; DIM];
    for a in 0..DIM {
        roots[a] = signed_root(beta[a], phi);
        roots_quad[a] = signed_root(beta[a], phi - std::f64::consts::FRAC_PI_2);
    }
    let c_phi = pauli_string_operator(&roots);
    let c_phi_minus_half_pi = pauli_string_operator(&roots_quad);

    let al = |x: usize| amps.alpha[x];
    let sqrt_gamma0 = 0.25 * (al(0b111) - al(0b000) + al(0b110) - al(0b001));
    let sqrt_gamma1 = 0.25 * (al(0b000) - al(0b111) + 3.0 * al(0b110) - 3.0 * al(0b001));
    let sqrt_gamma2 = 0.25 * I * (al(0b111) + al(0b000) - al(0b110) - al(0b001));

    let mut dephasing = RealMatrix8::zeros();
    let mut stark = RealMatrix8::zeros();
    for x in 0..DIM {
        for y in 0..DIM {
            let dchi = amps.chi_x[x] - amps.chi_x[y];
            let prod = amps.alpha[x] * amps.alpha[y].conj();
            dephasing[(x, y)] = dchi * prod.im;
            stark[(x, y)] = dchi * prod.re;
        }
    }

    MeasurementModel {
        phi,
        beta,
        rates,
        c_phi,
        c_phi_minus_half_pi,
        sqrt_gamma0,
        sqrt_gamma1,
        sqrt_gamma2,
        dephasing,
        stark,
    }
}

/// Closed-form steady-state root rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyRates {
    pub sqrt_kappa_gamma0: f64,
    pub sqrt_kappa_gamma1: f64,
    pub sqrt_kappa_gamma2: f64,
    /// Bad-cavity measurement rate `64 epsilon^2 chi^2 / kappa^3`.
    pub gamma_m: f64,
}

/// Root of the bad-cavity rate carrying the sign of `-chi`, so that it equals
/// the steady `sqrt(kappa Gamma_0)` as `chi -> 0` from either side.
pub fn signed_sqrt_gamma_m(chi: f64, params: &SystemParams) -> f64 {
    -8.0 * params.epsilon * chi / params.kappa.powf(1.5)
}

pub fn steady_rate_formulas(chi_over_kappa: f64, params: &SystemParams) -> SteadyRates {
    let r = chi_over_kappa;
    let chi = r * params.kappa;
    let root_m = signed_sqrt_gamma_m(chi, params);
    let den = 1.0 + 40.0 * r * r + 144.0 * r.powi(4);
    SteadyRates {
        sqrt_kappa_gamma0: root_m * (1.0 + 12.0 * r * r) / den,
        sqrt_kappa_gamma1: root_m * (24.0 * r * r) / den,
        sqrt_kappa_gamma2: root_m * (-4.0 * r) / den,
        gamma_m: 64.0 * params.epsilon.powi(2) * chi * chi / params.kappa.powi(3),
    }
}

/// Ratio of the rate at which `|x>` and `|y>` are distinguished to the decay
/// rate of their coherence, `kappa |alpha_x - alpha_y|^2 / (-Gamma_d^{xy})`.
pub fn measurement_to_dephasing_ratio(
    x: usize,
    y: usize,
    amps: &CoherentAmplitudeSet,
    params: &SystemParams,
) -> Result<f64> {
    if x >= DIM || y >= DIM {
        return Err(Error::InvalidArgument(format!("basis index out of range: {x}, {y}")));
    }
    let dchi = amps.chi_x[x] - amps.chi_x[y];
    if x == y || dchi == 0.0 {
        return Err(Error::UndefinedRatio { x, y });
    }
    let ax = amps.alpha[x];
    let ay = amps.alpha[y];
    let decay_rate = -dchi * (ax * ay.conj()).im;
    Ok(params.kappa * (ax - ay).norm_sqr() / decay_rate)
}

/// Gap `|2 sqrt(Gamma_0) - 2 sqrt(Gamma_1)|` between the `|000>` and
/// single-excitation outcomes at steady state.
pub fn outcome_separation(chi_over_kappa: f64, params: &SystemParams) -> f64 {
    let r = steady_rate_formulas(chi_over_kappa, params);
    2.0 * (r.sqrt_kappa_gamma0 - r.sqrt_kappa_gamma1).abs() / params.kappa.sqrt()
}

/// The four antipodal pairs `(x, complement of x)` with `x` of weight <= 1.
pub fn antipodal_pairs() -> [(usize, usize); 4] {
    let full = DIM - 1;
    [(0b000, full), (0b100, 0b011), (0b010, 0b101), (0b001, 0b110)]
}

/// Whether the amplitudes depend only on excitation number.
pub fn is_permutation_symmetric(amps: &CoherentAmplitudeSet, tol: f64) -> bool {
    (0..DIM).all(|x| {
        (0..DIM)
            .filter(|&y| excitations(y) == excitations(x))
            .all(|y| (amps.alpha[x] - amps.alpha[y]).norm() <= tol)
    })
}
