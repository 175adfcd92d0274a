//! Joint qubits + cavity conditional master equation in a truncated Fock space.
//!
//! The joint density matrix is stored densely with row index `x * n + m`
//! (qubit basis state `x`, photon number `m`). Every operator involved is
//! either diagonal in the qubit basis (the dispersive cavity Hamiltonian, the
//! cavity channels) or acts as the identity on the cavity (the qubit coupling
//! and decay), so the generator is applied block by block with short stencils.

use num_complex::Complex64;

use crate::algebra::{excitations, qubit_mask, z_total, DensityMatrix, DIM, N_QUBITS};
use crate::cavity::{dispersive_shift, steady_amplitudes};
use crate::engine::LocalDrive;
use crate::error::{Error, Result};
use crate::noise::NoiseProcess;
use crate::params::SystemParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest population allowed in the two highest Fock levels.
pub const TRUNCATION_TOL: f64 = 1e-4;

/// Steps between full Hermitization passes; the generator itself preserves
/// Hermiticity up to rounding.
const HERMITIZE_EVERY: u64 = 64;

/// Smallest Fock dimension satisfying `n >= ceil(4 |alpha_max|^2)`.
pub fn min_fock_dimension(params: &SystemParams) -> usize {
    let amax = steady_amplitudes(params).max_modulus();
    (4.0 * amax * amax).ceil() as usize
}

/// Precomputed pieces of the joint generator.
#[derive(Debug, Clone)]
pub struct JointGenerator {
    n: usize,
    chi_x: [f64; DIM],
    /// Qubit energies on the diagonal, `(chi/2) sum sigma_z`.
    energy: [f64; DIM],
    /// Off-diagonal qubit Hamiltonian entries `(x, z, H_xz)`.
    coupling: Vec<(usize, usize, Complex64)>,
    /// `sum_j gamma_j n_j(x)`.
    decay: [f64; DIM],
    gamma: [f64; N_QUBITS],
    kappa: f64,
    epsilon: f64,
    noise_amp: f64,
    /// `e^{-i phi}`.
    phase: Complex64,
    sqrt: Vec<f64>,
}

pub fn build_joint_generator(params: &SystemParams, n_fock: usize) -> Result<JointGenerator> {
    params.validate()?;
    let need = min_fock_dimension(params);
    if n_fock < need {
        return Err(Error::Config(format!(
            "n_fock = {n_fock} is below the coherent-state support bound {need}"
        )));
    }
    let mut chi_x = [0.0; DIM];
    let mut energy = [0.0; DIM];
    let mut decay = [0.0; DIM];
    for x in 0..DIM {
        chi_x[x] = dispersive_shift(x, params.chi);
        energy[x] = 0.5 * params.chi * z_total(x);
        for j in 1..=N_QUBITS {
            if x & qubit_mask(j) != 0 {
                decay[x] += params.gamma[j - 1];
            }
        }
    }
    // exchange J (s-_i s+_j + h.c.) and, when enabled, the static stray drive
    let mut h = crate::algebra::Matrix8::zeros();
    for i in 1..=N_QUBITS {
        for j in (i + 1)..=N_QUBITS {
            let (mi, mj) = (qubit_mask(i), qubit_mask(j));
            for x in 0..DIM {
                if (x & mi != 0) != (x & mj != 0) {
                    h[(x ^ mi ^ mj, x)] += Complex64::new(params.exchange_coupling(), 0.0);
                }
            }
        }
    }
    if params.include_stray_drive {
        let s = params.epsilon * params.lambda();
        h += LocalDrive::sigma_x([s; N_QUBITS]).matrix();
    }
    let mut coupling = Vec::new();
    for x in 0..DIM {
        for z in 0..DIM {
            if x != z && h[(x, z)] != ZERO {
                coupling.push((x, z, h[(x, z)]));
            }
        }
    }
    Ok(JointGenerator {
        n: n_fock,
        chi_x,
        energy,
        coupling,
        decay,
        gamma: params.gamma,
        kappa: params.kappa,
        epsilon: params.epsilon,
        noise_amp: (params.kappa * params.eta).sqrt(),
        phase: Complex64::from_polar(1.0, -params.phi),
        sqrt: (0..=n_fock + 1).map(|m| (m as f64).sqrt()).collect(),
    })
}

impl JointGenerator {
    pub fn n_fock(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        DIM * self.n
    }

    /// `L rho` for the Hermitian joint state `rho` (column-major, side `dim`).
    pub fn drift(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let d = self.dim();
        let sq = &self.sqrt[..=n];
        let zero_col = vec![ZERO; n];
        for y in 0..DIM {
            for x in 0..=y {
                let de = self.energy[x] - self.energy[y];
                let hd = 0.5 * (self.decay[x] + self.decay[y]);
                let (cx, cy) = (self.chi_x[x], self.chi_x[y]);
                for k in 0..n {
                    let base = (y * n + k) * d + x * n;
                    let c0 = &rho[base..base + n];
                    let cm = if k > 0 { &rho[base - d..base - d + n] } else { &zero_col[..] };
                    let cp = if k + 1 < n { &rho[base + d..base + d + n] } else { &zero_col[..] };
                    let sk = sq[k];
                    let sk1 = if k + 1 < n { sq[k + 1] } else { 0.0 };
                    let kf = k as f64;
                    let diag_k = de - cy * kf;
                    let o = &mut out[base..base + n];
                    for m in 0..n {
                        let b = c0[m];
                        let mf = m as f64;
                        let (up, jump) = if m + 1 < n {
                            (c0[m + 1] * sq[m + 1], cp[m + 1] * (sq[m + 1] * sk1))
                        } else {
                            (ZERO, ZERO)
                        };
                        let down = if m > 0 { c0[m - 1] * sq[m] } else { ZERO };
                        let ham = b * (cx * mf + diag_k)
                            + (up + down - cm[m] * sk - cp[m] * sk1) * self.epsilon;
                        o[m] = Complex64::new(ham.im, -ham.re) + jump * self.kappa
                            - b * (0.5 * self.kappa * (mf + kf) + hd);
                    }
                }
                // qubit decay feeding
                for j in 1..=N_QUBITS {
                    let mj = qubit_mask(j);
                    let g = self.gamma[j - 1];
                    if g == 0.0 || x & mj != 0 || y & mj != 0 {
                        continue;
                    }
                    let (xs, ys) = ((x | mj) * n, (y | mj) * n);
                    for k in 0..n {
                        let src = &rho[(ys + k) * d + xs..][..n];
                        let o = &mut out[(y * n + k) * d + x * n..][..n];
                        for (o, s) in o.iter_mut().zip(src) {
                            *o += s * g;
                        }
                    }
                }
                // off-diagonal qubit Hamiltonian: -i (H rho - rho H)
                for &(a, z, hv) in &self.coupling {
                    if a == x {
                        let w = -I * hv;
                        for k in 0..n {
                            let col = (y * n + k) * d;
                            let src = &rho[col + z * n..][..n];
                            let o = &mut out[col + x * n..][..n];
                            for (o, s) in o.iter_mut().zip(src) {
                                *o += w * s;
                            }
                        }
                    }
                    if z == y {
                        let w = I * hv;
                        for k in 0..n {
                            let src = &rho[(a * n + k) * d + x * n..][..n];
                            let o = &mut out[(y * n + k) * d + x * n..][..n];
                            for (o, s) in o.iter_mut().zip(src) {
                                *o += w * s;
                            }
                        }
                    }
                }
                if x != y {
                    for k in 0..n {
                        for m in 0..n {
                            let v = out[(y * n + k) * d + x * n + m];
                            out[(x * n + m) * d + y * n + k] = v.conj();
                        }
                    }
                }
            }
        }
    }

    /// `<a e^{-i phi} + h.c.>`.
    pub fn signal(&self, rho: &[Complex64]) -> f64 {
        2.0 * (self.phase * cavity_expectation(rho, self.n)).re
    }

    /// `H[a e^{-i phi}] rho`.
    pub fn innovation(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let d = self.dim();
        let sq = &self.sqrt[..=n];
        let s = self.signal(rho);
        let conj_phase = self.phase.conj();
        for col in 0..d {
            let k = col % n;
            let right = if k + 1 < n { Some(&rho[(col + 1) * d..(col + 2) * d]) } else { None };
            let c0 = &rho[col * d..(col + 1) * d];
            let o = &mut out[col * d..(col + 1) * d];
            for x in 0..DIM {
                let r = x * n;
                for m in 0..n {
                    let mut v = -c0[r + m] * s;
                    if m + 1 < n {
                        v += self.phase * c0[r + m + 1] * sq[m + 1];
                    }
                    if let Some(cr) = right {
                        v += conj_phase * cr[r + m] * sq[k + 1];
                    }
                    o[r + m] = v;
                }
            }
        }
    }
}

fn cavity_expectation(rho: &[Complex64], n: usize) -> Complex64 {
    let d = DIM * n;
    let mut acc = ZERO;
    for x in 0..DIM {
        for m in 0..n - 1 {
            // <a> = sum rho[(m+1), m] sqrt(m+1)
            acc += rho[(x * n + m) * d + x * n + m + 1] * ((m + 1) as f64).sqrt();
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    n_fock: usize,
    elements: Vec<Complex64>,
}

impl JointState {
    /// `rho_q (x) |0><0|`.
    pub fn product_vacuum(qubits: &DensityMatrix, n_fock: usize) -> Self {
        let d = DIM * n_fock;
        let mut elements = vec![ZERO; d * d];
        for y in 0..DIM {
            for x in 0..DIM {
                elements[(y * n_fock) * d + x * n_fock] = qubits.0[(x, y)];
            }
        }
        JointState { n_fock, elements }
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn dim(&self) -> usize {
        DIM * self.n_fock
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elements
    }

    pub fn get(&self, x: usize, m: usize, y: usize, k: usize) -> Complex64 {
        let n = self.n_fock;
        self.elements[(y * n + k) * self.dim() + x * n + m]
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.elements[i * d + i].re).sum()
    }

    /// `<a>` of the cavity.
    pub fn cavity_amplitude(&self) -> Complex64 {
        cavity_expectation(&self.elements, self.n_fock)
    }

    /// `tr(rho_xx a) / tr(rho_xx)`: cavity amplitude conditioned on `|x>`.
    pub fn conditional_amplitude(&self, x: usize) -> Option<Complex64> {
        let n = self.n_fock;
        let p: f64 = (0..n).map(|m| self.get(x, m, x, m).re).sum();
        if p <= 0.0 {
            return None;
        }
        let a: Complex64 = (0..n - 1)
            .map(|m| self.get(x, m + 1, x, m) * ((m + 1) as f64).sqrt())
            .sum();
        Some(a / p)
    }

    /// Population in the two highest Fock levels.
    pub fn top_population(&self) -> f64 {
        let n = self.n_fock;
        let mut p = 0.0;
        for x in 0..DIM {
            for m in n.saturating_sub(2)..n {
                p += self.get(x, m, x, m).re;
            }
        }
        p
    }

    /// Renormalizes; with `full` also restores exact Hermiticity.
    fn hygiene(&mut self, full: bool) -> f64 {
        let d = self.dim();
        if full {
            for r in 0..d {
                for c in (r + 1)..d {
                    let s = (self.elements[c * d + r] + self.elements[r * d + c].conj()) * 0.5;
                    self.elements[c * d + r] = s;
                    self.elements[r * d + c] = s.conj();
                }
            }
        }
        for r in 0..d {
            self.elements[r * d + r].im = 0.0;
        }
        let tr = self.trace();
        if tr.is_finite() && tr != 0.0 {
            let inv = 1.0 / tr;
            self.elements.iter_mut().for_each(|z| *z *= inv);
        }
        tr
    }

    fn check(&self, tr: f64, step: u64, dt: f64) -> Result<()> {
        if !tr.is_finite() || self.elements.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical {
                step,
                what: "non-finite joint state".into(),
            });
        }
        if (tr - 1.0).abs() > crate::engine::MAX_STEP_TRACE_DRIFT {
            return Err(Error::StepSize { step, trace: tr, dt });
        }
        let top = self.top_population();
        if top > TRUNCATION_TOL {
            return Err(Error::Truncation {
                n_fock: self.n_fock,
                population: top,
            });
        }
        Ok(())
    }
}

/// Partial trace over the cavity.
pub fn reduced_qubit_state(state: &JointState) -> DensityMatrix {
    let n = state.n_fock;
    let mut rho = DensityMatrix(crate::algebra::Matrix8::zeros());
    for y in 0..DIM {
        for x in 0..DIM {
            rho.0[(x, y)] = (0..n).map(|m| state.get(x, m, y, m)).sum();
        }
    }
    rho.hygiene();
    rho
}

/// Work buffers for stepping a joint state.
#[derive(Debug, Clone)]
pub struct JointWorkspace {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl JointWorkspace {
    pub fn new(generator: &JointGenerator) -> Self {
        let len = generator.dim() * generator.dim();
        JointWorkspace {
            k: std::array::from_fn(|_| vec![ZERO; len]),
            tmp: vec![ZERO; len],
        }
    }
}

/// Euler-Maruyama step driven by `xi` (variance `1/dt`); returns the
/// pre-renormalization trace.
pub fn joint_sme_step_in_place(
    state: &mut JointState,
    generator: &JointGenerator,
    work: &mut JointWorkspace,
    xi: f64,
    dt: f64,
    step: u64,
) -> Result<f64> {
    let [drift, noise, ..] = &mut work.k;
    generator.drift(&state.elements, drift);
    let kick = generator.noise_amp * xi * dt;
    if kick != 0.0 {
        generator.innovation(&state.elements, noise);
        for ((r, a), b) in state.elements.iter_mut().zip(drift.iter()).zip(noise.iter()) {
            *r += a * dt + b * kick;
        }
    } else {
        for (r, a) in state.elements.iter_mut().zip(drift.iter()) {
            *r += a * dt;
        }
    }
    let tr = state.hygiene(step % HERMITIZE_EVERY == 0);
    state.check(tr, step, dt)?;
    Ok(tr)
}

pub fn joint_sme_step(
    state: &JointState,
    generator: &JointGenerator,
    xi: f64,
    dt: f64,
) -> Result<JointState> {
    let mut next = state.clone();
    let mut work = JointWorkspace::new(generator);
    joint_sme_step_in_place(&mut next, generator, &mut work, xi, dt, 0)?;
    Ok(next)
}

/// Classical RK4 step of the noise-averaged joint equation.
pub fn joint_rk4_step_in_place(
    state: &mut JointState,
    generator: &JointGenerator,
    work: &mut JointWorkspace,
    dt: f64,
    step: u64,
) -> Result<f64> {
    let JointWorkspace { k, tmp } = work;
    let rho = &state.elements;
    generator.drift(rho, &mut k[0]);
    for (t, (r, a)) in tmp.iter_mut().zip(rho.iter().zip(k[0].iter())) {
        *t = r + a * (0.5 * dt);
    }
    let (k0, rest) = k.split_at_mut(1);
    generator.drift(tmp, &mut rest[0]);
    for (t, (r, a)) in tmp.iter_mut().zip(rho.iter().zip(rest[0].iter())) {
        *t = r + a * (0.5 * dt);
    }
    let (k1, rest) = rest.split_at_mut(1);
    generator.drift(tmp, &mut rest[0]);
    for (t, (r, a)) in tmp.iter_mut().zip(rho.iter().zip(rest[0].iter())) {
        *t = r + a * dt;
    }
    let (k2, k3) = rest.split_at_mut(1);
    generator.drift(tmp, &mut k3[0]);
    let w = dt / 6.0;
    for (i, r) in state.elements.iter_mut().enumerate() {
        *r += (k0[0][i] + (k1[0][i] + k2[0][i]) * 2.0 + k3[0][i]) * w;
    }
    let tr = state.hygiene(step % HERMITIZE_EVERY == 0);
    state.check(tr, step, dt)?;
    Ok(tr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointIntegrator {
    /// Conditional Euler-Maruyama.
    EulerMaruyama,
    /// Noise-averaged RK4 (ignores the detector).
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRecord {
    pub times: Vec<f64>,
    /// Normalized noiseless signal `<a e^{-i phi} + h.c.>`.
    pub signal: Vec<f64>,
    pub reduced: Vec<DensityMatrix>,
    /// Cavity amplitude conditioned on each basis state.
    pub conditional_amplitudes: Vec<[Option<Complex64>; DIM]>,
    pub max_top_population: f64,
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub params: SystemParams,
    pub n_fock: usize,
    pub initial: DensityMatrix,
    pub t_final: f64,
    pub dt: f64,
    pub stride: usize,
    pub seed: u64,
    pub integrator: JointIntegrator,
}

pub fn run_oracle(run: &OracleRun) -> Result<OracleRecord> {
    let generator = build_joint_generator(&run.params, run.n_fock)?;
    let mut work = JointWorkspace::new(&generator);
    let mut state = JointState::product_vacuum(&run.initial, run.n_fock);
    let steps = (run.t_final / run.dt).round() as u64;
    if steps == 0 || run.stride == 0 {
        return Err(Error::InvalidArgument("oracle run needs t_final > 0 and stride > 0".into()));
    }
    let mut noise = NoiseProcess::new(run.seed, run.dt);
    let mut rec = OracleRecord {
        times: Vec::new(),
        signal: Vec::new(),
        reduced: Vec::new(),
        conditional_amplitudes: Vec::new(),
        max_top_population: 0.0,
    };
    let record = |t: f64, s: &JointState, rec: &mut OracleRecord| {
        rec.times.push(t);
        rec.signal.push(generator.signal(&s.elements));
        rec.reduced.push(reduced_qubit_state(s));
        rec.conditional_amplitudes.push(std::array::from_fn(|x| s.conditional_amplitude(x)));
        rec.max_top_population = rec.max_top_population.max(s.top_population());
    };
    record(0.0, &state, &mut rec);
    for n in 0..steps {
        match run.integrator {
            JointIntegrator::EulerMaruyama => {
                let xi = noise.sample();
                joint_sme_step_in_place(&mut state, &generator, &mut work, xi, run.dt, n)?;
            }
            JointIntegrator::Rk4 => {
                joint_rk4_step_in_place(&mut state, &generator, &mut work, run.dt, n)?;
            }
        }
        if (n + 1) % run.stride as u64 == 0 {
            record((n + 1) as f64 * run.dt, &state, &mut rec);
        }
    }
    Ok(rec)
}

/// Basis states grouped by excitation number, useful for comparing
/// frame-invariant populations.
pub fn sector_populations(rho: &DensityMatrix) -> [f64; 4] {
    let mut p = [0.0; 4];
    for x in 0..DIM {
        p[excitations(x) as usize] += rho.0[(x, x)].re;
    }
    p
}
