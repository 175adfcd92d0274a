//! Dense operator algebra on the three-qubit Hilbert space.
//!
//! Basis order is binary counting `|000>, |001>, ..., |111>` with qubit 1 the
//! most significant bit. `sigma_z |1> = +|1>`, so the excited state carries
//! eigenvalue +1.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::{SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const N_QUBITS: usize = 3;
pub const DIM: usize = 8;

pub type Matrix8 = SMatrix<Complex64, DIM, DIM>;
pub type Vector8 = SVector<Complex64, DIM>;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bit mask of qubit `j` (1-based) inside a basis index.
#[inline]
pub const fn qubit_mask(j: usize) -> usize {
    1 << (N_QUBITS - j)
}

/// Number of excited qubits in basis state `x`.
#[inline]
pub const fn excitations(x: usize) -> u32 {
    (x as u32).count_ones()
}

/// Eigenvalue of `sum_j sigma_z_j` on basis state `x`: `2 n_excited - 3`.
#[inline]
pub fn z_total(x: usize) -> f64 {
    2.0 * excitations(x) as f64 - N_QUBITS as f64
}

fn check_qubit(j: usize) -> Result<()> {
    if (1..=N_QUBITS).contains(&j) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "qubit index {j} outside 1..={N_QUBITS}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            "plus" | "+" => Ok(Axis::Plus),
            "minus" | "-" => Ok(Axis::Minus),
            other => Err(Error::InvalidArgument(format!("unknown axis '{other}'"))),
        }
    }
}

/// An 8x8 operator on the qubit space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitOperator(pub Matrix8);

impl QubitOperator {
    pub fn zeros() -> Self {
        QubitOperator(Matrix8::zeros())
    }

    pub fn identity() -> Self {
        QubitOperator(Matrix8::identity())
    }

    pub fn diagonal(values: &[Complex64; DIM]) -> Self {
        let mut m = Matrix8::zeros();
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        QubitOperator(m)
    }

    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        QubitOperator(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        QubitOperator(self.0 * Complex64::new(s, 0.0))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..DIM).all(|a| (0..DIM).all(|b| a == b || self.0[(a, b)].norm() <= tol))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs(&(self.0 - self.0.adjoint())) <= tol
    }

    pub fn apply(&self, psi: &PureState) -> Vector8 {
        self.0 * psi.0
    }
}

impl Add for QubitOperator {
    type Output = QubitOperator;
    fn add(self, rhs: Self) -> Self {
        QubitOperator(self.0 + rhs.0)
    }
}

impl Sub for QubitOperator {
    type Output = QubitOperator;
    fn sub(self, rhs: Self) -> Self {
        QubitOperator(self.0 - rhs.0)
    }
}

impl Mul for QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: Self) -> Self {
        QubitOperator(self.0 * rhs.0)
    }
}

/// Embeds a single-qubit Pauli (or ladder) operator on qubit `j` (1..=3).
pub fn pauli(j: usize, axis: Axis) -> Result<QubitOperator> {
    check_qubit(j)?;
    let mask = qubit_mask(j);
    let mut m = Matrix8::zeros();
    for col in 0..DIM {
        let excited = col & mask != 0;
        match axis {
            Axis::Z => m[(col, col)] = if excited { ONE } else { -ONE },
            Axis::X => m[(col ^ mask, col)] = ONE,
            // sigma_y |0> = i|1>, sigma_y |1> = -i|0>
            Axis::Y => {
                m[(col ^ mask, col)] = if excited {
                    Complex64::new(0.0, -1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                }
            }
            Axis::Plus if !excited => m[(col | mask, col)] = ONE,
            Axis::Minus if excited => m[(col & !mask, col)] = ONE,
            Axis::Plus | Axis::Minus => {}
        }
    }
    Ok(QubitOperator(m))
}

/// Projector `|x><x|` onto a logical basis state.
pub fn projector(x: usize) -> Result<QubitOperator> {
    if x >= DIM {
        return Err(Error::InvalidArgument(format!("basis index {x} >= {DIM}")));
    }
    let mut m = Matrix8::zeros();
    m[(x, x)] = ONE;
    Ok(QubitOperator(m))
}

/// Normalized 8-component state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState(Vector8);

impl PureState {
    pub fn new(amplitudes: Vector8) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidArgument(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        Ok(PureState(amplitudes / Complex64::new(norm, 0.0)))
    }

    pub fn basis(x: usize) -> Result<Self> {
        if x >= DIM {
            return Err(Error::InvalidArgument(format!("basis index {x} >= {DIM}")));
        }
        let mut v = Vector8::zeros();
        v[x] = ONE;
        Ok(PureState(v))
    }

    pub fn amplitudes(&self) -> &Vector8 {
        &self.0
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix(self.0 * self.0.adjoint())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    Ground,
    Excited,
    WMinus,
    WPlus,
    SeparablePlus,
}

impl NamedState {
    pub const ALL: [NamedState; 5] = [
        NamedState::Ground,
        NamedState::WMinus,
        NamedState::WPlus,
        NamedState::Excited,
        NamedState::SeparablePlus,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NamedState::Ground => "ground",
            NamedState::Excited => "excited",
            NamedState::WMinus => "w_minus",
            NamedState::WPlus => "w_plus",
            NamedState::SeparablePlus => "separable_plus",
        }
    }

    pub fn state(&self) -> PureState {
        named_state(*self)
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ground" | "000" => Ok(NamedState::Ground),
            "excited" | "111" => Ok(NamedState::Excited),
            "w_minus" | "wminus" => Ok(NamedState::WMinus),
            "w_plus" | "wplus" => Ok(NamedState::WPlus),
            "separable_plus" | "psi_i" | "plus" => Ok(NamedState::SeparablePlus),
            other => Err(Error::InvalidArgument(format!("unknown state '{other}'"))),
        }
    }
}

pub fn named_state(name: NamedState) -> PureState {
    let mut v = Vector8::zeros();
    match name {
        NamedState::Ground => v[0b000] = ONE,
        NamedState::Excited => v[0b111] = ONE,
        NamedState::WMinus | NamedState::WPlus => {
            let n = if name == NamedState::WMinus { 1 } else { 2 };
            let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
            for x in (0..DIM).filter(|&x| excitations(x) == n) {
                v[x] = a;
            }
        }
        NamedState::SeparablePlus => v.fill(Complex64::new(0.5f64.powf(1.5), 0.0)),
    }
    PureState(v)
}

/// Unit-trace Hermitian 8x8 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Matrix8);

impl DensityMatrix {
    pub fn from_pure(psi: &PureState) -> Self {
        psi.projector()
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Matrix8::identity() / Complex64::new(DIM as f64, 0.0))
    }

    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn expectation(&self, op: &QubitOperator) -> Complex64 {
        (self.0 * op.0).trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(self.0 - self.0.adjoint()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn eigenvalues(&self) -> [f64; DIM] {
        let eig = SymmetricEigen::new(self.0);
        let mut out = [0.0; DIM];
        for (o, e) in out.iter_mut().zip(eig.eigenvalues.iter()) {
            *o = *e;
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Max-abs entrywise distance.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        max_abs(&(self.0 - other.0))
    }

    /// Hermitizes in place and rescales to unit trace. Returns the real trace
    /// observed before renormalization.
    pub fn hygiene(&mut self) -> f64 {
        hermitize(&mut self.0);
        let tr = self.0.trace().re;
        if tr.is_finite() && tr != 0.0 {
            self.0 /= Complex64::new(tr, 0.0);
        }
        tr
    }
}

pub(crate) fn hermitize(m: &mut Matrix8) {
    for a in 0..DIM {
        m[(a, a)].im = 0.0;
        for b in (a + 1)..DIM {
            let s = (m[(a, b)] + m[(b, a)].conj()) * 0.5;
            m[(a, b)] = s;
            m[(b, a)] = s.conj();
        }
    }
}

pub fn max_abs(m: &Matrix8) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Lindblad dissipator `c rho c^dag - (c^dag c rho + rho c^dag c)/2`.
pub fn dissipator(c: &QubitOperator, rho: &DensityMatrix) -> Matrix8 {
    let cd = c.0.adjoint();
    let cdc = cd * c.0;
    c.0 * rho.0 * cd - (cdc * rho.0 + rho.0 * cdc) * Complex64::new(0.5, 0.0)
}

/// Homodyne measurement superoperator `c rho + rho c^dag - <c + c^dag> rho`.
pub fn measurement_superop(c: &QubitOperator, rho: &DensityMatrix) -> Matrix8 {
    let cd = c.0.adjoint();
    let mean = ((c.0 + cd) * rho.0).trace();
    c.0 * rho.0 + rho.0 * cd - rho.0 * mean
}

pub fn commutator(a: &Matrix8, b: &Matrix8) -> Matrix8 {
    a * b - b * a
}

/// `<target| rho |target>`.
pub fn fidelity(rho: &DensityMatrix, target: &PureState) -> f64 {
    target.0.dotc(&(rho.0 * target.0)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ket(x: usize) -> PureState {
        PureState::basis(x).unwrap()
    }

    fn proj(x: usize) -> DensityMatrix {
        ket(x).projector()
    }

    #[test]
    fn sigma_z_excited_is_plus_one() {
        let z1 = pauli(1, Axis::Z).unwrap();
        let out = z1.apply(&ket(0b100));
        assert_eq!(out[0b100], ONE);
        let out = z1.apply(&ket(0b000));
        assert_eq!(out[0b000], -ONE);
    }

    #[test]
    fn lowering_and_flip() {
        let out = pauli(2, Axis::Minus).unwrap().apply(&ket(0b010));
        assert_eq!(out, *ket(0b000).amplitudes());
        let out = pauli(3, Axis::X).unwrap().apply(&ket(0b000));
        assert_eq!(out, *ket(0b001).amplitudes());
    }

    #[test]
    fn pauli_rejects_bad_index() {
        assert!(pauli(0, Axis::X).is_err());
        assert!(pauli(4, Axis::Z).is_err());
    }

    #[test]
    fn pauli_identities() {
        let id = QubitOperator::identity();
        for j in 1..=3 {
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let s = pauli(j, axis).unwrap();
                assert!(s.is_hermitian(0.0));
                assert_eq!(s * s, id);
            }
            let p = pauli(j, Axis::Plus).unwrap();
            let m = pauli(j, Axis::Minus).unwrap();
            assert_eq!(m * p + p * m, id);
            assert_eq!(p.adjoint(), m);
            // sigma_y = i (sigma_+ - sigma_-) in this convention
            let y = pauli(j, Axis::Y).unwrap();
            assert_eq!(
                y.0,
                (p.0 - m.0) * Complex64::new(0.0, 1.0),
                "sigma_y sign convention"
            );
        }
        for j in 1..=3 {
            for k in 1..=3 {
                let a = pauli(j, Axis::Z).unwrap().0;
                let b = pauli(k, Axis::Z).unwrap().0;
                assert_eq!(commutator(&a, &b), Matrix8::zeros());
            }
        }
    }

    #[test]
    fn named_states() {
        let wm = named_state(NamedState::WMinus);
        let s = 1.0 / 3f64.sqrt();
        for x in 0..DIM {
            let expect = if [0b001, 0b010, 0b100].contains(&x) { s } else { 0.0 };
            assert_abs_diff_eq!(wm.amplitudes()[x].re, expect, epsilon = 1e-15);
        }
        let sep = named_state(NamedState::SeparablePlus);
        for x in 0..DIM {
            assert_abs_diff_eq!(sep.amplitudes()[x].re, 0.5f64.powf(1.5), epsilon = 1e-15);
        }
        let wp = named_state(NamedState::WPlus);
        assert_abs_diff_eq!(wm.inner(&wp).norm(), 0.0);
        for n in NamedState::ALL {
            assert_abs_diff_eq!(n.state().amplitudes().norm(), 1.0, epsilon = 1e-12);
        }
        for w in [wm, wp] {
            assert_eq!(w.inner(&named_state(NamedState::Ground)).norm(), 0.0);
            assert_eq!(w.inner(&named_state(NamedState::Excited)).norm(), 0.0);
        }
        assert!("nope".parse::<NamedState>().is_err());
        assert_eq!("w-minus".parse::<NamedState>().unwrap(), NamedState::WMinus);
    }

    #[test]
    fn single_decay_dissipator() {
        let d = dissipator(&pauli(1, Axis::Minus).unwrap(), &proj(0b100));
        let expect = proj(0b000).0 - proj(0b100).0;
        assert_abs_diff_eq!(max_abs(&(d - expect)), 0.0);
        let d = dissipator(&pauli(1, Axis::Z).unwrap(), &proj(0b000));
        assert_eq!(max_abs(&d), 0.0);
    }

    #[test]
    fn measurement_superop_examples() {
        let z1 = pauli(1, Axis::Z).unwrap();
        // eigenprojector: no information gain
        assert_abs_diff_eq!(max_abs(&measurement_superop(&z1, &proj(0b100))), 0.0);
        let mix = DensityMatrix((proj(0b000).0 + proj(0b100).0) * Complex64::new(0.5, 0.0));
        let out = measurement_superop(&z1, &mix);
        // <2 z1> = 0 so H[z1] rho = z1 rho + rho z1 = diag(-1, +1) on the two states
        let expect = proj(0b100).0 - proj(0b000).0;
        assert_abs_diff_eq!(max_abs(&(out - expect)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let wm = named_state(NamedState::WMinus);
        assert_abs_diff_eq!(fidelity(&wm.projector(), &wm), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&proj(0), &wm), 0.0);
        let psi = named_state(NamedState::SeparablePlus);
        // 3 * (1/sqrt3 * (1/sqrt2)^3)^2 = 3/8
        assert_abs_diff_eq!(fidelity(&psi.projector(), &wm), 0.375, epsilon = 1e-12);
    }

    #[test]
    fn hygiene_restores_manifold() {
        let mut rho = proj(0b011);
        rho.0[(0, 1)] = Complex64::new(0.1, 0.2);
        rho.0 *= Complex64::new(1.3, 0.0);
        let tr = rho.hygiene();
        assert_abs_diff_eq!(tr, 1.3, epsilon = 1e-12);
        assert!(rho.hermiticity_error() <= 1e-15);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_of_projector() {
        let e = named_state(NamedState::WPlus).projector().eigenvalues();
        assert_abs_diff_eq!(e[7], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[0], 0.0, epsilon = 1e-12);
    }
}
