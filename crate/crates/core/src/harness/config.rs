use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::NamedState;
use crate::engine::EngineKind;
use crate::error::{Error, Result};
use crate::feedback::{FilterDrive, SignRule};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    MeasureOnly,
    Feedback,
    NoFeedbackDecay,
    SweepChi,
    SweepEpsilon,
    SweepF,
    SweepEta,
    DecayRateSets,
    FilterMismatch,
    OracleCheck,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::MeasureOnly => "measure_only",
            Scenario::Feedback => "feedback",
            Scenario::NoFeedbackDecay => "no_feedback_decay",
            Scenario::SweepChi => "sweep_chi",
            Scenario::SweepEpsilon => "sweep_epsilon",
            Scenario::SweepF => "sweep_f",
            Scenario::SweepEta => "sweep_eta",
            Scenario::DecayRateSets => "decay_rate_sets",
            Scenario::FilterMismatch => "filter_mismatch",
            Scenario::OracleCheck => "oracle_check",
        }
    }

    pub fn sweep_param(&self) -> Option<SweepParam> {
        match self {
            Scenario::SweepChi => Some(SweepParam::Chi),
            Scenario::SweepEpsilon => Some(SweepParam::Epsilon),
            Scenario::SweepF => Some(SweepParam::F),
            Scenario::SweepEta => Some(SweepParam::Eta),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Chi,
    Epsilon,
    F,
    Eta,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Chi => "chi",
            SweepParam::Epsilon => "epsilon",
            SweepParam::F => "f",
            SweepParam::Eta => "eta",
        }
    }

    pub fn scenario(&self) -> Scenario {
        match self {
            SweepParam::Chi => Scenario::SweepChi,
            SweepParam::Epsilon => Scenario::SweepEpsilon,
            SweepParam::F => Scenario::SweepF,
            SweepParam::Eta => Scenario::SweepEta,
        }
    }

    /// `params` with this parameter set to `value` (in units of kappa).
    pub fn apply(&self, params: SystemParams, value: f64) -> SystemParams {
        match self {
            SweepParam::Chi => params.with_chi(value * params.kappa),
            SweepParam::Epsilon => params.with_epsilon(value * params.kappa),
            SweepParam::F => params.with_f_max(value * params.kappa),
            SweepParam::Eta => params.with_eta(value),
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chi" => Ok(SweepParam::Chi),
            "epsilon" | "eps" => Ok(SweepParam::Epsilon),
            "f" | "f_max" => Ok(SweepParam::F),
            "eta" => Ok(SweepParam::Eta),
            other => Err(Error::InvalidArgument(format!("unknown sweep parameter '{other}'"))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved experiment description. Serialized as a flat TOML table:
/// the physical parameters sit next to the run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n_trajectories: usize,
    /// Run length in units of `1/kappa`.
    pub t_final: f64,
    pub master_seed: u64,
    /// Steps between stored samples.
    pub stride: usize,
    pub output_path: PathBuf,
    pub engine: EngineKind,
    pub sign_rule: SignRule,
    /// Input of the adiabatic filter in the filter-mismatch scenario.
    pub filter_drive: FilterDrive,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub initial_states: Vec<NamedState>,
    /// Sweep values in units of kappa (`eta` is dimensionless).
    pub grid: Vec<f64>,
    /// Time at which sweeps read the fidelity.
    pub readout_time: f64,
    /// Sweeps average each trajectory over `[readout_time - readout_window,
    /// readout_time]`; 0 reads the single stored sample.
    pub readout_window: f64,
    /// Start of the window over which stabilized fidelities are averaged.
    pub stabilized_from: f64,
    pub gamma_sets: Vec<[f64; 3]>,
    /// Fock dimension for the oracle; 0 picks the smallest admissible one.
    pub n_fock: usize,
    pub oracle_dt: f64,
    pub oracle_trajectories: usize,
    pub oracle_t_final: f64,
    #[serde(flatten)]
    pub params: SystemParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::Feedback,
            n_trajectories: 1000,
            t_final: 350.0,
            master_seed: 1,
            stride: 1000,
            output_path: PathBuf::from("out"),
            engine: EngineKind::Polaron,
            sign_rule: SignRule::Positive,
            filter_drive: FilterDrive::Innovation,
            workers: 0,
            initial_states: NamedState::ALL.to_vec(),
            grid: Vec::new(),
            readout_time: 350.0,
            readout_window: 0.0,
            stabilized_from: 50.0,
            gamma_sets: Vec::new(),
            n_fock: 0,
            oracle_dt: 1e-4,
            oracle_trajectories: 4,
            oracle_t_final: 20.0,
            params: SystemParams::default(),
        }
    }
}

impl ExperimentConfig {
    /// Default experiment settings for `scenario`.
    pub fn for_scenario(scenario: Scenario) -> Self {
        let mut c = ExperimentConfig {
            scenario,
            output_path: PathBuf::from("out").join(scenario.as_str()),
            ..Default::default()
        };
        match scenario {
            Scenario::MeasureOnly => {
                c.params = c.params.with_gamma(0.0);
                c.initial_states = vec![NamedState::SeparablePlus];
                c.t_final = 20.0;
                c.stride = 100;
            }
            Scenario::Feedback => {}
            Scenario::NoFeedbackDecay => {
                c.initial_states = vec![NamedState::WMinus];
            }
            Scenario::SweepChi => {
                c.initial_states = vec![NamedState::Ground];
                c.grid = vec![-0.05, -0.11, -0.2, -0.25, -0.29, -0.33, -0.4, -0.5, -0.77, -1.0];
            }
            Scenario::SweepEpsilon => {
                c.initial_states = vec![NamedState::Ground];
                c.grid = vec![0.5, 1.0, 1.5, 2.0];
            }
            Scenario::SweepF => {
                c.initial_states = vec![NamedState::Ground];
                c.grid = vec![0.5, 1.0, 2.0, 4.0];
            }
            Scenario::SweepEta => {
                c.initial_states = vec![NamedState::Ground];
                c.grid = vec![0.2, 0.4, 0.6, 0.8, 1.0];
            }
            Scenario::DecayRateSets => {
                c.initial_states = vec![NamedState::Ground];
                c.gamma_sets = vec![[5e-3, 1e-2, 1.5e-2], [2e-3, 8e-3, 2e-2], [2e-2, 5e-3, 5e-3]];
            }
            Scenario::FilterMismatch => {
                c.initial_states = vec![NamedState::Ground];
                c.n_trajectories = 100;
                c.t_final = 200.0;
            }
            Scenario::OracleCheck => {
                c.initial_states = vec![NamedState::SeparablePlus];
                c.n_trajectories = 1;
                c.t_final = 20.0;
            }
        }
        c
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parses a flat TOML table, rejecting keys that are not config fields.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let known = known_keys();
        let unknown: Vec<&String> = table.keys().filter(|k| !known.contains(k.as_str())).collect();
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown keys: {unknown:?}")));
        }
        let base = match table.get("scenario") {
            Some(v) => {
                let s: Scenario = v.clone().try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
                ExperimentConfig::for_scenario(s)
            }
            None => ExperimentConfig::default(),
        };
        let mut merged = toml::Table::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
        merged.extend(table);
        let config: ExperimentConfig = merged.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.n_trajectories == 0 {
            return bad("n_trajectories must be at least 1".into());
        }
        if !(self.t_final > 0.0) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.stride == 0 {
            return bad("stride must be positive".into());
        }
        if self.initial_states.is_empty() {
            return bad("initial_states must not be empty".into());
        }
        if self.scenario.sweep_param().is_some() {
            if self.grid.is_empty() {
                return bad(format!("{} needs a non-empty grid", self.scenario));
            }
            if !(self.readout_window >= 0.0) || self.readout_window > self.readout_time {
                return bad(format!("readout_window {} outside [0, readout_time]", self.readout_window));
            }
            if self.readout_time > self.t_final {
                return bad(format!(
                    "readout_time {} exceeds t_final {}",
                    self.readout_time, self.t_final
                ));
            }
        }
        if self.scenario == Scenario::DecayRateSets && self.gamma_sets.is_empty() {
            return bad("decay_rate_sets needs at least one entry in gamma_sets".into());
        }
        if self.scenario == Scenario::OracleCheck {
            if !(self.oracle_dt > 0.0) || !(self.oracle_t_final > 0.0) || self.oracle_trajectories == 0 {
                return bad("oracle_dt, oracle_t_final and oracle_trajectories must be positive".into());
            }
        }
        Ok(())
    }
}

fn known_keys() -> BTreeSet<String> {
    toml::Table::try_from(ExperimentConfig::default())
        .expect("config serializes to TOML")
        .keys()
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        for s in [Scenario::MeasureOnly, Scenario::SweepChi, Scenario::DecayRateSets] {
            let c = ExperimentConfig::for_scenario(s);
            let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(c, back);
        }
    }

    #[test]
    fn flat_keys_and_scenario_defaults() {
        let c = ExperimentConfig::from_toml("scenario = \"measure_only\"\nchi = -0.5\nn_trajectories = 7\n").unwrap();
        assert_eq!(c.params.chi, -0.5);
        assert_eq!(c.params.gamma, [0.0; 3]);
        assert_eq!(c.n_trajectories, 7);
        assert_eq!(c.initial_states, vec![NamedState::SeparablePlus]);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(matches!(ExperimentConfig::from_toml("chii = 1.0"), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_toml("n_trajectories = 0").is_err());
        assert!(ExperimentConfig::from_toml("scenario = \"sweep_f\"\ngrid = []").is_err());
        assert!(ExperimentConfig::from_toml("eta = 2.0").is_err());
    }

    #[test]
    fn sweep_param_apply() {
        let p = SystemParams::default();
        assert_eq!(SweepParam::Chi.apply(p, -0.29).chi, -0.29);
        assert_eq!(SweepParam::F.apply(p, 4.0).f_max, 4.0);
        assert_eq!("eps".parse::<SweepParam>().unwrap(), SweepParam::Epsilon);
    }
}
