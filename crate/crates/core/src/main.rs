use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wstate::engine::EngineKind;
use wstate::feedback::{FilterDrive, SignRule};
use wstate::harness::{run_experiment, ExperimentConfig, Scenario, SweepParam};
use wstate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "wstate", version, about = "W-state feedback trajectory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measurement-only collapse from |psi_i> with outcome grouping.
    MeasureOnly,
    /// Feedback generation and stabilization of |W->.
    Feedback,
    /// Sweep one parameter and read the fidelity at the readout time.
    Sweep {
        #[arg(long, value_enum)]
        param: ParamArg,
        /// Comma-separated values in units of kappa.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Vec<f64>,
    },
    /// Heterogeneous decay-rate sets with and without feedback.
    DecaySets,
    /// No-feedback decay of |W->.
    NoFeedbackDecay,
    /// Feedback from an adiabatic-model filter acting on the polaron plant.
    FilterMismatch,
    /// Joint qubit + cavity model against the effective model.
    OracleCheck,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trajectories: Option<usize>,
    /// Run length in units of 1/kappa.
    #[arg(long = "t-final", global = true)]
    t_final: Option<f64>,
    /// Integration step in units of 1/kappa.
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long = "stray-drive", global = true, value_enum)]
    stray_drive: Option<Toggle>,
    #[arg(long = "sign-rule", global = true, value_enum)]
    sign_rule: Option<SignArg>,
    /// Input of the adiabatic filter in filter-mismatch.
    #[arg(long = "filter-drive", global = true, value_enum)]
    filter_drive: Option<DriveArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ParamArg {
    Chi,
    Epsilon,
    F,
    Eta,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EngineArg {
    Polaron,
    Adiabatic,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Toggle {
    On,
    Off,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SignArg {
    Zero,
    Positive,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DriveArg {
    Innovation,
    SharedNoise,
}

fn scenario(command: &Command) -> Scenario {
    match command {
        Command::MeasureOnly => Scenario::MeasureOnly,
        Command::Feedback => Scenario::Feedback,
        Command::Sweep { param, .. } => match param {
            ParamArg::Chi => SweepParam::Chi,
            ParamArg::Epsilon => SweepParam::Epsilon,
            ParamArg::F => SweepParam::F,
            ParamArg::Eta => SweepParam::Eta,
        }
        .scenario(),
        Command::DecaySets => Scenario::DecayRateSets,
        Command::NoFeedbackDecay => Scenario::NoFeedbackDecay,
        Command::FilterMismatch => Scenario::FilterMismatch,
        Command::OracleCheck => Scenario::OracleCheck,
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let wanted = scenario(&cli.command);
    let mut config = match &cli.common.config {
        Some(path) => {
            let c = ExperimentConfig::load(path)?;
            if c.scenario != wanted {
                return Err(Error::Config(format!(
                    "{} describes scenario {}, not {wanted}",
                    path.display(),
                    c.scenario
                )));
            }
            c
        }
        None => ExperimentConfig::for_scenario(wanted),
    };
    let c = &cli.common;
    if let Some(s) = c.seed {
        config.master_seed = s;
    }
    if let Some(n) = c.trajectories {
        config.n_trajectories = n;
    }
    if let Some(t) = c.t_final {
        config.t_final = t;
        if config.readout_time > t {
            config.readout_time = t;
        }
    }
    if let Some(dt) = c.dt {
        config.params.dt = dt;
    }
    if let Some(out) = &c.out {
        config.output_path = out.clone();
    }
    if let Some(w) = c.workers {
        config.workers = w;
    }
    if let Some(e) = c.engine {
        config.engine = match e {
            EngineArg::Polaron => EngineKind::Polaron,
            EngineArg::Adiabatic => EngineKind::Adiabatic,
        };
    }
    if let Some(s) = c.stray_drive {
        config.params.include_stray_drive = matches!(s, Toggle::On);
    }
    if let Some(s) = c.sign_rule {
        config.sign_rule = match s {
            SignArg::Zero => SignRule::Zero,
            SignArg::Positive => SignRule::Positive,
        };
    }
    if let Some(d) = c.filter_drive {
        config.filter_drive = match d {
            DriveArg::Innovation => FilterDrive::Innovation,
            DriveArg::SharedNoise => FilterDrive::SharedNoise,
        };
    }
    if let Command::Sweep { grid, .. } = &cli.command {
        if !grid.is_empty() {
            config.grid = grid.clone();
        }
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = resolve(&cli).and_then(|config| {
        log::info!(
            "{}: {} trajectories, t_final {}, seed {} -> {}",
            config.scenario,
            config.n_trajectories,
            config.t_final,
            config.master_seed,
            config.output_path.display()
        );
        run_experiment(&config)
    });
    match outcome {
        Ok(out) => {
            for (k, v) in &out.summary {
                println!("{k} = {v}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
