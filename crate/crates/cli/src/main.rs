use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use porestab_cli::commands;
use porestab_cli::config::{RunConfig, Scenario};
use porestab_cli::manifest::OutputDir;
use porestab_cli::CliError;

#[derive(Parser)]
#[command(name = "porestab", version, about = "Catalytic pore simulator and stability analyzer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, stability verdict, energy identity and instability probe.
    Analyze(Common),
    /// Perturbed nonlinear run with mass ledger and decay fit.
    Simulate(Common),
    /// Wall Poincare constant under refinement.
    Poincare(Common),
    /// Stability reports over a parameter grid.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed, overriding `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweep points.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn scenario_kind(s: &Scenario) -> &'static str {
    match s {
        Scenario::Analyze { .. } => "analyze",
        Scenario::Simulate { .. } => "simulate",
        Scenario::Poincare { .. } => "poincare",
        Scenario::Sweep { .. } => "sweep",
    }
}

fn execute(name: &str, args: Common) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(dir) = args.output {
        cfg.output_dir = dir;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let kind = scenario_kind(&cfg.scenario);
    if kind != name {
        return Err(CliError::Model(porestab::Error::Config {
            field: "scenario.kind".into(),
            reason: format!("config describes a {kind} run, not {name}"),
        }));
    }
    if args.jobs == 0 {
        return Err(CliError::Model(porestab::Error::Config {
            field: "--jobs".into(),
            reason: "must be >= 1".into(),
        }));
    }
    let mut out = OutputDir::create(&cfg.output_dir.clone(), name, &cfg)?;
    let outcome = commands::run(&cfg, &mut out, args.jobs);
    out.finish(&outcome)?;
    outcome
}

fn main() -> ExitCode {
    // one thread per sweep point; nested linear-algebra threads only oversubscribe
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::Analyze(a) => ("analyze", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Poincare(a) => ("poincare", a),
        Command::Sweep(a) => ("sweep", a),
    };
    match execute(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("porestab {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
