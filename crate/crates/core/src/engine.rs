//! Conditional stochastic master equations for the three qubits.
//!
//! Two generators are provided: the polaron-frame equation, whose measurement
//! operators and dephasing/Stark matrices come from the state-dependent cavity
//! amplitudes, and the bad-cavity (adiabatic) limit, where a single amplitude
//! `-2i epsilon / kappa` replaces them. Both are integrated with an Ito
//! Euler-Maruyama step followed by a hygiene pass.
//!
//! Every generator has the same shape,
//!
//! ```text
//! L rho = K rho + rho K^dag + sum_j gamma_j s-_j rho s+_j + kappa lambda^2 S- rho S+ + M o rho
//! ```
//!
//! with `K = -i H - (1/2) sum L^dag L`, `S- = sum_j s-_j` and `M o rho` an
//! entrywise product, plus a diffusive term `sqrt(kappa eta) H[d] rho dW` for
//! a diagonal jump operator `d`. The kernels below exploit that shape instead
//! of forming superoperators.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{excitations, qubit_mask, z_total, DensityMatrix, Matrix8, DIM, N_QUBITS};
use crate::cavity::{
    build_measurement_operators, signed_sqrt_gamma_m, CoherentAmplitudeSet, MeasurementModel,
};
use crate::error::{Error, Result};
use crate::params::SystemParams;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pre-renormalization trace deviation beyond which a step is rejected.
pub const MAX_STEP_TRACE_DRIFT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Polaron,
    Adiabatic,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Polaron => "polaron",
            EngineKind::Adiabatic => "adiabatic",
        })
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "polaron" => Ok(EngineKind::Polaron),
            "adiabatic" => Ok(EngineKind::Adiabatic),
            other => Err(Error::InvalidArgument(format!("unknown engine '{other}'"))),
        }
    }
}

/// Basis indices with qubit `j` unexcited, per qubit.
const LOWER_INDICES: [[usize; 4]; N_QUBITS] = [[0, 1, 2, 3], [0, 1, 4, 5], [0, 2, 4, 6]];

/// `rho -> U rho U^dag` for `U = c - i s sigma_x` on the qubit with `mask`.
#[inline]
fn rotate_x(d: &mut [Complex64], mask: usize, lows: &[usize; 4], c: f64, s: f64) {
    // -i s a = (s a.im, -s a.re)
    let mix = |a0: Complex64, a1: Complex64| {
        Complex64::new(c * a0.re + s * a1.im, c * a0.im - s * a1.re)
    };
    for col in 0..DIM {
        let base = col * DIM;
        for &x in lows {
            let (a0, a1) = (d[base + x], d[base + x + mask]);
            d[base + x] = mix(a0, a1);
            d[base + x + mask] = mix(a1, a0);
        }
    }
    // right multiplication by U^dag = c + i s sigma_x
    let mix_dag = |a0: Complex64, a1: Complex64| {
        Complex64::new(c * a0.re - s * a1.im, c * a0.im + s * a1.re)
    };
    for &x in lows {
        let (c0, c1) = (x * DIM, (x + mask) * DIM);
        for row in 0..DIM {
            let (a0, a1) = (d[c0 + row], d[c1 + row]);
            d[c0 + row] = mix_dag(a0, a1);
            d[c1 + row] = mix_dag(a1, a0);
        }
    }
}

/// Single-qubit drive `sum_j (h_j s+_j + h_j^* s-_j)`. Real `h_j = f_j`
/// gives `f_j sigma_x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalDrive(pub [Complex64; N_QUBITS]);

impl LocalDrive {
    pub fn sigma_x(f: [f64; N_QUBITS]) -> Self {
        LocalDrive(f.map(|v| Complex64::new(v, 0.0)))
    }

    /// `epsilon lambda (s+ e^{i Delta t} + h.c.)` on every qubit.
    pub fn stray(params: &SystemParams, t: f64) -> Self {
        let h = params.epsilon * params.lambda() * Complex64::from_polar(1.0, params.delta() * t);
        LocalDrive([h; N_QUBITS])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|h| *h == ZERO)
    }

    pub fn plus(self, other: LocalDrive) -> LocalDrive {
        let mut out = self;
        for (o, h) in out.0.iter_mut().zip(other.0.iter()) {
            *o += h;
        }
        out
    }

    /// `rho -> U rho U^dag` with `U = exp(-i dt X)`, exact because the drive is
    /// a sum of commuting single-qubit terms.
    pub fn rotate(&self, rho: &mut Matrix8, dt: f64) {
        let d: &mut [Complex64] = rho.as_mut_slice();
        for j in 1..=N_QUBITS {
            let h = self.0[j - 1];
            let r = h.norm();
            if r == 0.0 {
                continue;
            }
            // U = cos(r dt) - i sin(r dt)/r (h s+ + h^* s-)
            let (sin, c) = (r * dt).sin_cos();
            let s = -I * (sin / r);
            let u10 = s * h;
            let u01 = s * h.conj();
            let mask = qubit_mask(j);
            let lows = &LOWER_INDICES[j - 1];
            if h.im == 0.0 {
                // sigma_x drive: U = c - i s' sigma_x with s' = sin(h dt)
                let sn = sin / r * h.re;
                rotate_x(d, mask, lows, c, sn);
                continue;
            }
            // storage is column-major: entry (row, col) at col * DIM + row
            for col in 0..DIM {
                let base = col * DIM;
                for &x in lows {
                    let (a0, a1) = (d[base + x], d[base + x + mask]);
                    d[base + x] = a0 * c + u01 * a1;
                    d[base + x + mask] = u10 * a0 + a1 * c;
                }
            }
            let (d01, d10) = (u10.conj(), u01.conj());
            for &x in lows {
                let (c0, c1) = (x * DIM, (x + mask) * DIM);
                for row in 0..DIM {
                    let (a0, a1) = (d[c0 + row], d[c1 + row]);
                    d[c0 + row] = a0 * c + a1 * d10;
                    d[c1 + row] = a0 * d01 + a1 * c;
                }
            }
        }
    }

    pub fn matrix(&self) -> Matrix8 {
        let mut m = Matrix8::zeros();
        for j in 1..=N_QUBITS {
            let mask = qubit_mask(j);
            let h = self.0[j - 1];
            for x in (0..DIM).filter(|x| x & mask == 0) {
                m[(x | mask, x)] += h;
                m[(x, x | mask)] += h.conj();
            }
        }
        m
    }
}

/// Coherent part shared by both engines: `sum_j w sigma_z_j / 2` plus the
/// cavity-mediated exchange `J sum_{j>i} (s-_i s+_j + h.c.)`.
fn static_hamiltonian(z_coeff: f64, exchange: f64) -> Matrix8 {
    let mut h = Matrix8::zeros();
    for x in 0..DIM {
        h[(x, x)] = Complex64::new(0.5 * z_coeff * z_total(x), 0.0);
    }
    for i in 1..=N_QUBITS {
        for j in (i + 1)..=N_QUBITS {
            let (mi, mj) = (qubit_mask(i), qubit_mask(j));
            for x in 0..DIM {
                // flip-flop between qubits i and j when exactly one is excited
                if (x & mi != 0) != (x & mj != 0) {
                    h[(x ^ mi ^ mj, x)] += Complex64::new(exchange, 0.0);
                }
            }
        }
    }
    h
}

/// `sum_j gamma_j s+_j s-_j + p S+ S-`.
fn decay_anticommutator(gamma: &[f64; N_QUBITS], purcell: f64) -> Matrix8 {
    let mut m = Matrix8::zeros();
    for x in 0..DIM {
        for j in 1..=N_QUBITS {
            if x & qubit_mask(j) != 0 {
                m[(x, x)] += gamma[j - 1];
            }
        }
    }
    if purcell != 0.0 {
        // S+ S- = sum_{jk} s+_j s-_k
        for j in 1..=N_QUBITS {
            for k in 1..=N_QUBITS {
                let (mj, mk) = (qubit_mask(j), qubit_mask(k));
                for x in (0..DIM).filter(|x| x & mk != 0) {
                    let y = x & !mk;
                    if y & mj == 0 {
                        m[(y | mj, x)] += purcell;
                    }
                }
            }
        }
    }
    m
}

/// Precomputed qubit generator and measurement channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    /// `-i H - (1/2) sum L^dag L` without time-dependent drives.
    k: Matrix8,
    gamma: [f64; N_QUBITS],
    purcell: f64,
    /// Entrywise coefficients `M_xy`.
    entrywise: Matrix8,
    /// Diagonal jump operator of the homodyne channel.
    jump: [Complex64; DIM],
    /// `sqrt(kappa eta)`.
    noise_amp: f64,
    kappa_eta: f64,
    /// Diagonal of `c_0 + c_0^dag`, the quadrature used to label outcomes.
    outcome: [f64; DIM],
    /// Nonzero pattern of `k`: it conserves excitation number, so each row
    /// couples to at most three columns.
    k_rows: [[(usize, Complex64); 3]; DIM],
    k_len: [usize; DIM],
    /// `(j, x | mask_j)` for every qubit `j` unexcited in `x`.
    raise: [[(usize, usize); N_QUBITS]; DIM],
    raise_len: [usize; DIM],
    /// Weight of `rho[(x | m_j, y | m_k)]` in `(x, y)` of the jump terms.
    jump_weight: [[f64; N_QUBITS]; N_QUBITS],
}

impl Generator {
    fn assemble(
        params: &SystemParams,
        z_coeff: f64,
        entrywise: Matrix8,
        jump: [Complex64; DIM],
        outcome: [f64; DIM],
    ) -> Self {
        let h = static_hamiltonian(z_coeff, params.exchange_coupling());
        let purcell = params.purcell_rate();
        let a = decay_anticommutator(&params.gamma, purcell);
        let k = h * (-I) - a * Complex64::new(0.5, 0.0);
        let mut k_rows = [[(0, ZERO); 3]; DIM];
        let mut k_len = [0; DIM];
        let mut raise = [[(0, 0); N_QUBITS]; DIM];
        let mut raise_len = [0; DIM];
        for x in 0..DIM {
            for y in (0..DIM).filter(|&y| excitations(y) == excitations(x)) {
                k_rows[x][k_len[x]] = (y, k[(x, y)]);
                k_len[x] += 1;
            }
            for j in 1..=N_QUBITS {
                let m = qubit_mask(j);
                if x & m == 0 {
                    raise[x][raise_len[x]] = (j - 1, x | m);
                    raise_len[x] += 1;
                }
            }
        }
        let mut jump_weight = [[purcell; N_QUBITS]; N_QUBITS];
        for (j, row) in jump_weight.iter_mut().enumerate() {
            row[j] += params.gamma[j];
        }
        Generator {
            k_rows,
            k_len,
            raise,
            raise_len,
            jump_weight,
            k,
            gamma: params.gamma,
            purcell,
            entrywise,
            jump,
            noise_amp: (params.kappa * params.eta).sqrt(),
            kappa_eta: params.kappa * params.eta,
            outcome,
        }
    }

    /// Polaron-frame generator at the given amplitudes.
    pub fn polaron(params: &SystemParams, amps: &CoherentAmplitudeSet) -> Self {
        let model = build_measurement_operators(amps, params);
        let outcome = if params.phi == 0.0 {
            model.signal_diagonal()
        } else {
            let p0 = SystemParams { phi: 0.0, ..*params };
            build_measurement_operators(amps, &p0).signal_diagonal()
        };
        Self::from_model(params, &model, outcome)
    }

    fn from_model(params: &SystemParams, model: &MeasurementModel, outcome: [f64; DIM]) -> Self {
        let mut m = Matrix8::zeros();
        for x in 0..DIM {
            for y in 0..DIM {
                m[(x, y)] = Complex64::new(model.dephasing[(x, y)], -model.stark[(x, y)]);
            }
        }
        Self::assemble(params, params.chi, m, model.jump_diagonal(), outcome)
    }

    /// Bad-cavity generator: Stark shift `chi |alpha|^2` with
    /// `alpha = -2i epsilon / kappa`, collective dephasing
    /// `(Gamma_e / 2) D[sum sigma_z]` and measurement operator
    /// `(1/2) sqrt(Gamma_m / kappa) sum sigma_z`, `Gamma_m = 2 Gamma_e`.
    pub fn adiabatic(params: &SystemParams) -> Self {
        let alpha_sq = (2.0 * params.epsilon / params.kappa).powi(2);
        let root_m = signed_sqrt_gamma_m(params.chi, params);
        let gamma_e = 0.5 * root_m * root_m;
        let mut m = Matrix8::zeros();
        let mut jump = [ZERO; DIM];
        let mut outcome = [0.0; DIM];
        let rotation = Complex64::from_polar(1.0, -params.phi);
        for x in 0..DIM {
            for y in 0..DIM {
                let dz = z_total(x) - z_total(y);
                m[(x, y)] = Complex64::new(-0.25 * gamma_e * dz * dz, 0.0);
            }
            let c0 = 0.5 * root_m / params.kappa.sqrt() * z_total(x);
            jump[x] = rotation * c0;
            outcome[x] = 2.0 * c0;
        }
        let z_coeff = params.chi + 2.0 * params.chi * alpha_sq;
        Self::assemble(params, z_coeff, m, jump, outcome)
    }

    pub fn for_engine(kind: EngineKind, params: &SystemParams, amps: &CoherentAmplitudeSet) -> Self {
        match kind {
            EngineKind::Polaron => Self::polaron(params, amps),
            EngineKind::Adiabatic => Self::adiabatic(params),
        }
    }

    pub fn noise_amplitude(&self) -> f64 {
        self.noise_amp
    }

    pub fn kappa_eta(&self) -> f64 {
        self.kappa_eta
    }

    /// Diagonal of the signal operator `d + d^dag`.
    pub fn signal_diagonal(&self) -> [f64; DIM] {
        self.jump.map(|d| 2.0 * d.re)
    }

    /// `<d + d^dag>` in state `rho`: the noiseless normalized signal.
    #[inline]
    pub fn signal(&self, rho: &Matrix8) -> f64 {
        (0..DIM).map(|x| 2.0 * self.jump[x].re * rho[(x, x)].re).sum()
    }

    /// Noiseless `<c_0 + c_0^dag>`.
    #[inline]
    pub fn outcome(&self, rho: &Matrix8) -> f64 {
        (0..DIM).map(|x| self.outcome[x] * rho[(x, x)].re).sum()
    }

    pub fn outcome_diagonal(&self) -> [f64; DIM] {
        self.outcome
    }

    /// Homodyne current `kappa eta <d + d^dag> + sqrt(kappa eta) xi`.
    pub fn current(&self, rho: &Matrix8, xi: f64) -> f64 {
        self.kappa_eta * self.signal(rho) + self.noise_amp * xi
    }

    /// Writes `L rho` (including the local drive) into a fresh matrix.
    pub fn drift(&self, rho: &Matrix8, drive: &LocalDrive) -> Matrix8 {
        let k = if drive.is_zero() {
            self.k
        } else {
            self.k - drive.matrix() * I
        };
        let p = k * rho;
        let mut out = Matrix8::zeros();
        for b in 0..DIM {
            for a in 0..DIM {
                out[(a, b)] = p[(a, b)] + p[(b, a)].conj() + self.entrywise[(a, b)] * rho[(a, b)];
            }
        }
        for j in 1..=N_QUBITS {
            let g = self.gamma[j - 1];
            if g == 0.0 {
                continue;
            }
            let m = qubit_mask(j);
            for b in (0..DIM).filter(|b| b & m == 0) {
                for a in (0..DIM).filter(|a| a & m == 0) {
                    out[(a, b)] += rho[(a | m, b | m)] * g;
                }
            }
        }
        if self.purcell != 0.0 {
            for b in 0..DIM {
                for a in 0..DIM {
                    let mut acc = ZERO;
                    for j in 1..=N_QUBITS {
                        let mj = qubit_mask(j);
                        if a & mj != 0 {
                            continue;
                        }
                        for k in 1..=N_QUBITS {
                            let mk = qubit_mask(k);
                            if b & mk == 0 {
                                acc += rho[(a | mj, b | mk)];
                            }
                        }
                    }
                    out[(a, b)] += acc * self.purcell;
                }
            }
        }
        out
    }

    /// `H[d] rho` for the diagonal jump operator.
    pub fn innovation_term(&self, rho: &Matrix8) -> Matrix8 {
        let s = self.signal(rho);
        let mut out = Matrix8::zeros();
        for b in 0..DIM {
            for a in 0..DIM {
                out[(a, b)] = (self.jump[a] + self.jump[b].conj() - s) * rho[(a, b)];
            }
        }
        out
    }

    /// `rho + L rho dt + kick H[d] rho` without the local drive, using the
    /// excitation-number structure and Hermiticity.
    fn update(&self, rho: &Matrix8, dt: f64, kick: f64) -> Matrix8 {
        // column-major: entry (row, col) at col * DIM + row
        let r: &[Complex64] = rho.as_slice();
        let mut p = [ZERO; DIM * DIM];
        for a in 0..DIM {
            let ks = &self.k_rows[a][..self.k_len[a]];
            for b in 0..DIM {
                let col = &r[b * DIM..(b + 1) * DIM];
                p[b * DIM + a] = ks.iter().map(|&(c, kv)| kv * col[c]).sum();
            }
        }
        let s = self.signal(rho);
        let mut out = Matrix8::zeros();
        let o: &mut [Complex64] = out.as_mut_slice();
        for b in 0..DIM {
            let rb = &self.raise[b][..self.raise_len[b]];
            let db = self.jump[b].conj() - s;
            for a in 0..=b {
                let v = r[b * DIM + a];
                let mut drift = p[b * DIM + a] + p[a * DIM + b].conj() + self.entrywise[(a, b)] * v;
                for &(j, aj) in &self.raise[a][..self.raise_len[a]] {
                    for &(k, bk) in rb {
                        drift += r[bk * DIM + aj] * self.jump_weight[j][k];
                    }
                }
                let next = v + drift * dt + (self.jump[a] + db) * v * kick;
                o[b * DIM + a] = next;
                o[a * DIM + b] = next.conj();
            }
        }
        out
    }

    /// In-place update with Wiener increment `dw = xi dt`: the local drive is
    /// applied as an exact product of single-qubit rotations, the remaining
    /// generator and the diffusion by an Euler-Maruyama step. Returns the trace
    /// before renormalization.
    pub fn step_in_place(
        &self,
        rho: &mut DensityMatrix,
        drive: &LocalDrive,
        dw: f64,
        dt: f64,
    ) -> f64 {
        if !drive.is_zero() {
            drive.rotate(&mut rho.0, dt);
        }
        rho.0 = self.update(&rho.0, dt, self.noise_amp * dw);
        rho.hygiene()
    }

    /// Positivity-preserving step of a filter driven by the record increment
    /// `dy = current dt / sqrt(kappa eta)`. Exact drive rotation, then
    /// `(1 + K dt) rho (1 + K dt)^dag` plus the jump terms, the unmonitored
    /// entrywise part as an exponential, and finally the diagonal operator
    /// `1 - (kappa eta / 2) |d|^2 dt + sqrt(kappa eta) d dy`. Each stage maps
    /// the positive cone into itself. Returns the trace before renormalization.
    pub fn kraus_step_in_place(&self, rho: &mut DensityMatrix, drive: &LocalDrive, dy: f64, dt: f64) -> f64 {
        if !drive.is_zero() {
            drive.rotate(&mut rho.0, dt);
        }
        let r = rho.0;
        let a = Matrix8::identity() + self.k * Complex64::new(dt, 0.0);
        let mut out = a * r * a.adjoint();
        for x in 0..DIM {
            for y in 0..DIM {
                let mut acc = ZERO;
                for &(j, xj) in &self.raise[x][..self.raise_len[x]] {
                    for &(k, yk) in &self.raise[y][..self.raise_len[y]] {
                        acc += r[(xj, yk)] * self.jump_weight[j][k];
                    }
                }
                let (dx, dy_) = (self.jump[x], self.jump[y]);
                let monitored = dx * dy_.conj() - 0.5 * (dx.norm_sqr() + dy_.norm_sqr());
                let rest = self.entrywise[(x, y)] - monitored * self.kappa_eta;
                out[(x, y)] = (out[(x, y)] + acc * dt) * (rest * dt).exp();
            }
        }
        let m = self
            .jump
            .map(|d| 1.0 - 0.5 * self.kappa_eta * d.norm_sqr() * dt + d * (self.noise_amp * dy));
        for x in 0..DIM {
            for y in 0..DIM {
                out[(x, y)] *= m[x] * m[y].conj();
            }
        }
        rho.0 = out;
        rho.hygiene()
    }

    /// Checked step: rejects non-finite states and oversized trace drift.
    pub fn step(
        &self,
        rho: &DensityMatrix,
        drive: &LocalDrive,
        dw: f64,
        dt: f64,
        step_index: u64,
    ) -> Result<DensityMatrix> {
        let mut next = *rho;
        let tr = self.step_in_place(&mut next, drive, dw, dt);
        check_step(&next, tr, dt, step_index)?;
        Ok(next)
    }
}

/// Filter steps only need a finite state with positive weight.
pub(crate) fn check_filter_step(rho: &DensityMatrix, trace: f64, step: u64) -> Result<()> {
    if !trace.is_finite() || !rho.is_finite() || trace <= 0.0 {
        return Err(Error::Numerical {
            step,
            what: format!("filter lost its weight (trace {trace})"),
        });
    }
    Ok(())
}

pub(crate) fn check_step(rho: &DensityMatrix, trace: f64, dt: f64, step: u64) -> Result<()> {
    if !trace.is_finite() || !rho.is_finite() {
        return Err(Error::Numerical {
            step,
            what: "non-finite density matrix".into(),
        });
    }
    if (trace - 1.0).abs() > MAX_STEP_TRACE_DRIFT {
        return Err(Error::StepSize { step, trace, dt });
    }
    Ok(())
}

fn stray_drive(params: &SystemParams, t: f64) -> LocalDrive {
    if params.include_stray_drive {
        LocalDrive::stray(params, t)
    } else {
        LocalDrive::default()
    }
}

/// Polaron-frame generator `L rho` at time `t`.
pub fn polaron_drift(
    rho: &DensityMatrix,
    amps: &CoherentAmplitudeSet,
    params: &SystemParams,
    t: f64,
) -> Matrix8 {
    Generator::polaron(params, amps).drift(&rho.0, &stray_drive(params, t))
}

/// One Euler-Maruyama step of the polaron-frame conditional equation driven
/// by the white-noise sample `xi` (variance `1/dt`).
pub fn polaron_sme_step(
    rho: &DensityMatrix,
    amps: &CoherentAmplitudeSet,
    params: &SystemParams,
    xi: f64,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    params.with_dt(dt).validate()?;
    Generator::polaron(params, amps).step(rho, &stray_drive(params, t), xi * dt, dt, 0)
}

/// One Euler-Maruyama step of the bad-cavity conditional equation.
pub fn adiabatic_sme_step(
    rho: &DensityMatrix,
    params: &SystemParams,
    xi: f64,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    params.with_dt(dt).validate()?;
    Generator::adiabatic(params).step(rho, &stray_drive(params, t), xi * dt, dt, 0)
}

/// Drift-only (noise-averaged) polaron step.
pub fn unconditional_step(
    rho: &DensityMatrix,
    amps: &CoherentAmplitudeSet,
    params: &SystemParams,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    params.with_dt(dt).validate()?;
    Generator::polaron(params, amps).step(rho, &stray_drive(params, t), 0.0, dt, 0)
}

/// `I_c = kappa eta <c_phi + c_phi^dag> + sqrt(kappa eta) xi`.
pub fn homodyne_sample(
    rho: &DensityMatrix,
    model: &MeasurementModel,
    params: &SystemParams,
    xi: f64,
) -> f64 {
    let ke = params.kappa * params.eta;
    let signal: f64 = model
        .signal_diagonal()
        .iter()
        .enumerate()
        .map(|(x, s)| s * rho.0[(x, x)].re)
        .sum();
    ke * signal + ke.sqrt() * xi
}

/// Projector onto the sector with `n` excitations; used by tests and the
/// outcome classifier.
pub fn sector_population(rho: &DensityMatrix, n: u32) -> f64 {
    (0..DIM)
        .filter(|&x| excitations(x) == n)
        .map(|x| rho.0[(x, x)].re)
        .sum()
}
