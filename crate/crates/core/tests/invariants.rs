use nalgebra::SVector;
use num_complex::Complex64;
use proptest::prelude::*;

use wstate::algebra::{fidelity, pauli, Axis, DensityMatrix, NamedState, PureState, QubitOperator, DIM};
use wstate::cavity::{outcome_separation, steady_amplitudes, steady_rate_formulas};
use wstate::engine::{EngineKind, Generator, LocalDrive};
use wstate::feedback::{FeedbackLaw, SignRule};
use wstate::noise::{derive_seed, NoiseProcess};
use wstate::params::SystemParams;

fn pure_state() -> impl Strategy<Value = PureState> {
    prop::array::uniform8((-1.0f64..1.0, -1.0f64..1.0))
        .prop_filter("non-zero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let raw = SVector::<Complex64, DIM>::from_fn(|i, _| Complex64::new(v[i].0, v[i].1));
            PureState::new(raw / Complex64::new(raw.norm(), 0.0)).expect("normalized")
        })
}

/// Convex mixture of two random pure states.
fn mixed_state() -> impl Strategy<Value = DensityMatrix> {
    (pure_state(), pure_state(), 0.0f64..1.0).prop_map(|(a, b, p)| {
        DensityMatrix(a.projector().0 * Complex64::new(p, 0.0) + b.projector().0 * Complex64::new(1.0 - p, 0.0))
    })
}

fn engine_kind() -> impl Strategy<Value = EngineKind> {
    prop_oneof![Just(EngineKind::Polaron), Just(EngineKind::Adiabatic)]
}

fn params() -> impl Strategy<Value = SystemParams> {
    (-0.8f64..-0.02, 0.5f64..2.0, 0.0f64..0.04, 0.2f64..1.0)
        .prop_map(|(chi, eps, g, eta)| SystemParams::default().with_chi(chi).with_epsilon(eps).with_gamma(g).with_eta(eta))
}

proptest! {
    #[test]
    fn projectors_are_pure_unit_trace(psi in pure_state()) {
        let rho = psi.projector();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!((rho.purity() - 1.0).abs() < 1e-10);
        prop_assert!((fidelity(&rho, &psi) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_is_a_probability(rho in mixed_state()) {
        let mut total = 0.0;
        for x in 0..DIM {
            let f = fidelity(&rho, &PureState::basis(x).unwrap());
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
            total += f;
        }
        prop_assert!((total - 1.0).abs() < 1e-10);
        for s in NamedState::ALL {
            let f = fidelity(&rho, &s.state());
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        }
    }

    #[test]
    fn mixtures_are_positive(rho in mixed_state()) {
        prop_assert!(rho.min_eigenvalue() > -1e-12);
        prop_assert!(rho.purity() <= 1.0 + 1e-12);
    }

    #[test]
    fn local_rotations_are_unitary(rho in mixed_state(), f in prop::array::uniform3(-4.0f64..4.0), dt in 1e-4f64..0.5) {
        let before = rho.eigenvalues();
        let mut m = rho.0;
        LocalDrive::sigma_x(f).rotate(&mut m, dt);
        let after = DensityMatrix(m);
        prop_assert!((after.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(after.hermiticity_error() < 1e-12);
        for (a, b) in before.iter().zip(after.eigenvalues()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn hygiene_restores_unit_trace(rho in mixed_state(), scale in 0.5f64..2.0) {
        let mut r = DensityMatrix(rho.0 * Complex64::new(scale, 0.0));
        let tr = r.hygiene();
        prop_assert!((tr - scale).abs() < 1e-12);
        prop_assert!((r.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(r.distance(&rho) < 1e-12);
    }

    #[test]
    fn euler_step_keeps_trace_and_hermiticity(
        p in params(),
        kind in engine_kind(),
        rho in mixed_state(),
        f in prop::array::uniform3(-2.0f64..2.0),
        z in -4.0f64..4.0,
    ) {
        let g = Generator::for_engine(kind, &p, &steady_amplitudes(&p));
        let mut r = rho;
        let tr = g.step_in_place(&mut r, &LocalDrive::sigma_x(f), z * p.dt.sqrt(), p.dt);
        prop_assert!(tr.is_finite());
        prop_assert!((tr - 1.0).abs() < 0.1);
        prop_assert!((r.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(r.hermiticity_error() < 1e-12);
    }

    #[test]
    fn kraus_step_preserves_positivity(
        p in params(),
        kind in engine_kind(),
        rho in mixed_state(),
        f in prop::array::uniform3(-2.0f64..2.0),
        dys in prop::collection::vec(-5.0f64..5.0, 1..40),
    ) {
        let g = Generator::for_engine(kind, &p, &steady_amplitudes(&p));
        let mut r = rho;
        for dy in dys {
            g.kraus_step_in_place(&mut r, &LocalDrive::sigma_x(f), dy * p.dt.sqrt(), p.dt);
            prop_assert!(r.min_eigenvalue() > -1e-12);
            prop_assert!((r.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bang_bang_control_is_bounded(rho in mixed_state(), f_max in 0.1f64..5.0, positive in any::<bool>()) {
        let rule = if positive { SignRule::Positive } else { SignRule::Zero };
        let mut law = FeedbackLaw::new(f_max).with_sign_rule(rule);
        for c in law.control(&rho) {
            prop_assert!(c == 0.0 || c.abs() == f_max);
            if positive {
                prop_assert!(c.abs() == f_max);
            }
        }
    }

    #[test]
    fn closed_form_rates_bounded_by_bad_cavity_limit(r in -2.0f64..-1e-3, eps in 0.1f64..4.0) {
        let p = SystemParams::default().with_epsilon(eps);
        let s = steady_rate_formulas(r, &p);
        let root_m = s.gamma_m.sqrt();
        prop_assert!(s.sqrt_kappa_gamma0.abs() <= root_m * (1.0 + 1e-12));
        prop_assert!(s.sqrt_kappa_gamma2.abs() <= root_m);
        prop_assert!(outcome_separation(r, &p) >= 0.0);
    }

    #[test]
    fn derived_seeds_are_distinct_and_stable(master in any::<u64>(), i in 0u64..1_000_000, j in 0u64..1_000_000) {
        prop_assume!(i != j);
        prop_assert_ne!(derive_seed(master, i), derive_seed(master, j));
        prop_assert_eq!(derive_seed(master, i), derive_seed(master, i));
    }

    #[test]
    fn noise_streams_replay(seed in any::<u64>(), levels in 0u32..3) {
        let mut a = NoiseProcess::refined(seed, 1e-3, levels);
        let mut b = NoiseProcess::refined(seed, 1e-3, levels);
        for _ in 0..64 {
            prop_assert_eq!(a.sample().to_bits(), b.sample().to_bits());
        }
    }

    #[test]
    fn refined_noise_aggregates_to_coarse(seed in any::<u64>()) {
        let dt = 1e-3;
        let mut coarse = NoiseProcess::new(seed, dt);
        let mut fine = NoiseProcess::refined(seed, dt / 4.0, 2);
        for _ in 0..32 {
            let w = coarse.sample() * dt;
            let sum: f64 = (0..4).map(|_| fine.sample() * dt / 4.0).sum();
            prop_assert!((w - sum).abs() < 1e-12);
        }
    }
}

#[test]
fn pauli_algebra() {
    let id = QubitOperator::identity();
    for j in 1..=3 {
        let x = pauli(j, Axis::X).unwrap();
        let y = pauli(j, Axis::Y).unwrap();
        let z = pauli(j, Axis::Z).unwrap();
        for s in [&x, &y, &z] {
            assert!(((*s * *s).0 - id.0).norm() < 1e-14);
            assert!(s.is_hermitian(1e-14));
        }
        let xy = (x * y).0;
        // sigma_z |1> = +|1>
        assert!((xy + z.0 * Complex64::i()).norm() < 1e-14);
        for k in (1..=3).filter(|&k| k != j) {
            let xk = pauli(k, Axis::X).unwrap();
            let c = (z * xk).0 - (xk * z).0;
            assert!(c.norm() < 1e-14);
        }
    }
    assert!(pauli(0, Axis::X).is_err());
    assert!(pauli(4, Axis::X).is_err());
}
