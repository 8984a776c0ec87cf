use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tmsq_core::scenarios::{
    builtin, builtin_scenarios, output_dir, parse_values, run_scenario, run_sweep, write_outputs, write_sweep,
    RunOptions, ScenarioConfig,
};
use tmsq_core::Error;

/// Two-mode squeezing simulations of a driven qubit coupled to two resonators.
#[derive(Parser)]
#[command(name = "tmsq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a builtin scenario or a TOML configuration.
    Run(RunArgs),
    /// Run a configuration once per value of one axis.
    Sweep(SweepArgs),
    /// List the builtin scenarios.
    ListScenarios,
}

#[derive(Args)]
struct Overrides {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of trajectories.
    #[arg(long)]
    traj: Option<usize>,
    /// Master seed of the trajectory ensemble.
    #[arg(long)]
    seed: Option<u64>,
    /// Fock levels for both modes of the reduced engines.
    #[arg(long)]
    fock: Option<usize>,
    /// Fail when the truncation guard fires.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Dotted field path; several paths may be joined with `+`.
    #[arg(long)]
    axis: String,
    /// Comma-separated values; `:` separates components of a joined axis.
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    values: String,
    #[command(flatten)]
    overrides: Overrides,
}

impl Overrides {
    fn apply(&self, cfg: &mut ScenarioConfig) -> Result<(), Error> {
        if let Some(n) = self.traj {
            cfg.mcwf.n_traj = n;
        }
        if let Some(s) = self.seed {
            cfg.mcwf.master_seed = s;
        }
        if let Some(n) = self.fock {
            cfg.truncation.n_a = n;
            cfg.truncation.n_b = n;
        }
        cfg.validate()
    }

    fn options(&self) -> RunOptions {
        RunOptions { strict: self.strict }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigInvalid(_)
        | Error::DensityTooLarge { .. }
        | Error::InvalidDimension(_)
        | Error::LevelMismatch(_)
        | Error::UnknownLabel(_)
        | Error::DegenerateDetuning
        | Error::IncompatibleSpaces(_)
        | Error::DimensionMismatch { .. } => 2,
        _ => 3,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::ConfigInvalid(_) => "config_invalid",
        Error::DensityTooLarge { .. } => "density_too_large",
        Error::NeedsLargerSpace { .. } => "truncation_leak",
        Error::StepSizeTooLarge { .. } => "step_size_too_large",
        Error::IntegratorFailure(_) => "integrator_failure",
        Error::InvalidVariance(_) => "invalid_variance",
        Error::Io(_) => "io",
        _ => "invalid_input",
    }
}

fn load(args: &RunArgs) -> Result<ScenarioConfig, Error> {
    let mut cfg = match (&args.scenario, &args.config) {
        (Some(name), _) => builtin(name)?,
        (None, Some(path)) => ScenarioConfig::from_path(path)?,
        (None, None) => return Err(Error::ConfigInvalid("either --scenario or --config is required".into())),
    };
    args.overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<(), Error> {
    let cfg = load(&args)?;
    let record = run_scenario(&cfg, &args.overrides.options())?;
    let paths = write_outputs(&record, &output_dir(&cfg, args.overrides.out.as_deref()))?;
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    for e in &record.engines {
        if let Some(best) = e.min_v_ar() {
            println!(
                "{:<20} min V_ar {:.6} ({:.2} dB) at r = {:.3}",
                e.engine.name(),
                best.record.v_ar,
                best.record.db,
                best.record.r
            );
        }
    }
    println!("wrote {} and {}", paths.csv.display(), paths.summary.display());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let mut cfg = ScenarioConfig::from_path(&args.config)?;
    args.overrides.apply(&mut cfg)?;
    let values = parse_values(&args.values);
    let record = run_sweep(&cfg, &args.axis, &values, &args.overrides.options())?;
    let path = write_sweep(&record, &cfg.name, &output_dir(&cfg, args.overrides.out.as_deref()))?;
    for p in &record.points {
        for w in &p.record.warnings {
            eprintln!("warning [{} = {}]: {w}", record.axis, p.value);
        }
        println!("{} = {:<12} min V_ar {:?}", record.axis, p.value, p.record.min_v_ar());
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::ListScenarios => {
            for cfg in builtin_scenarios() {
                println!("{:<16} {}", cfg.name, cfg.description);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            eprintln!("{}", serde_json::json!({ "error": kind(&e), "message": e.to_string(), "exit_code": code }));
            ExitCode::from(code)
        }
    }
}
