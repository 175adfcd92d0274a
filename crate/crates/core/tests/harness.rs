use wstate::algebra::NamedState;
use wstate::harness::classify::{classify_and_average, theoretical_plateaus};
use wstate::harness::ensemble::{run_ensemble, EnsembleSpec};
use wstate::harness::{ExperimentConfig, Scenario};
use wstate::params::SystemParams;
use wstate::trajectory::TrajectoryConfig;

const ALL: [Scenario; 10] = [
    Scenario::MeasureOnly,
    Scenario::Feedback,
    Scenario::NoFeedbackDecay,
    Scenario::SweepChi,
    Scenario::SweepEpsilon,
    Scenario::SweepF,
    Scenario::SweepEta,
    Scenario::DecayRateSets,
    Scenario::FilterMismatch,
    Scenario::OracleCheck,
];

#[test]
fn scenario_defaults_validate_and_round_trip() {
    for s in ALL {
        let c = ExperimentConfig::for_scenario(s);
        c.validate().unwrap();
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c, "{s}");
    }
}

#[test]
fn partial_toml_fills_scenario_defaults() {
    let c = ExperimentConfig::from_toml("scenario = \"sweep_eta\"\nn_trajectories = 7\nchi = -0.4\n").unwrap();
    assert_eq!(c.scenario, Scenario::SweepEta);
    assert_eq!(c.n_trajectories, 7);
    assert_eq!(c.params.chi, -0.4);
    assert_eq!(c.grid, ExperimentConfig::for_scenario(Scenario::SweepEta).grid);
}

#[test]
fn heterogeneous_sets_share_the_reference_mean() {
    let c = ExperimentConfig::for_scenario(Scenario::DecayRateSets);
    assert_eq!(c.gamma_sets.len(), 3);
    for set in &c.gamma_sets {
        let mean = SystemParams::default().with_gammas(*set).mean_gamma();
        assert!((mean - 1e-2).abs() < 1e-12, "{set:?}");
    }
}

#[test]
fn ensembles_are_prefix_stable_and_worker_independent() {
    let template = TrajectoryConfig::new(SystemParams::default().with_gamma(0.0), NamedState::SeparablePlus)
        .with_t_final(2.0)
        .with_stride(100);
    let small = run_ensemble(&EnsembleSpec::new(template.clone(), 3, 9).with_workers(1)).unwrap();
    let large = run_ensemble(&EnsembleSpec::new(template, 6, 9).with_workers(2)).unwrap();
    assert_eq!(small.records.len(), 3);
    for (a, b) in small.records.iter().zip(&large.records) {
        assert_eq!(a.fidelity, b.fidelity);
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.final_state, b.final_state);
    }
}

#[test]
fn classification_accounts_for_every_record() {
    let params = SystemParams::default().with_gamma(0.0);
    let template = TrajectoryConfig::new(params, NamedState::SeparablePlus)
        .with_t_final(6.0)
        .with_stride(100);
    let e = run_ensemble(&EnsembleSpec::new(template, 24, 4)).unwrap();
    let c = classify_and_average(&e.records, theoretical_plateaus(&params)).unwrap();
    assert_eq!(c.total(), 24);
    assert_eq!(c.counts.iter().sum::<usize>() + c.unclassified, 24);
}

#[test]
fn documented_config_example_parses() {
    let c = ExperimentConfig::from_toml(
        r#"
scenario = "feedback"
n_trajectories = 200
t_final = 100.0
chi = -0.11
gamma = [0.004, 0.004, 0.004]
initial_states = ["ground", "w_minus"]
"#,
    )
    .unwrap();
    assert_eq!(c.initial_states, vec![NamedState::Ground, NamedState::WMinus]);
    assert_eq!(c.params.gamma, [0.004; 3]);
}
