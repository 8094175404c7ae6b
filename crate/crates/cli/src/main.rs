use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cqed_cli::config::ScenarioConfig;
use cqed_cli::error::CliError;
use cqed_cli::presets::{self, Command};

#[derive(Parser)]
#[command(name = "cqed", version, about = "Circuit QED scenario runner")]
struct Cli {
    /// Worker threads for parameter sweeps.
    #[arg(long, global = true, env = "CQED_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Energy spectra (fig5, fig9, fig13)
    Spectrum(RunArgs),
    /// Master-equation and steady-state dynamics (fig8, fig11, fig12)
    Evolve(RunArgs),
    /// Dispersive readout (fig7)
    Readout(RunArgs),
    /// Gate simulations (gates)
    Gate(RunArgs),
    /// Bosonic and qubit codes (codes)
    Code(RunArgs),
    /// Wigner functions and squeezing (fig17, fig18)
    Phasespace(RunArgs),
    /// Print the scenario catalog as JSON
    ListScenarios,
    /// Print a scenario's default config as JSON
    Show { name: String },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Run a built-in scenario with its defaults
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: config `outputs.dir`, else `out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let (command, args) = match cli.action {
        Action::Spectrum(a) => (Command::Spectrum, a),
        Action::Evolve(a) => (Command::Evolve, a),
        Action::Readout(a) => (Command::Readout, a),
        Action::Gate(a) => (Command::Gate, a),
        Action::Code(a) => (Command::Code, a),
        Action::Phasespace(a) => (Command::Phasespace, a),
        Action::ListScenarios => {
            return Ok(serde_json::to_string_pretty(&presets::catalog()).expect("catalog serializes"));
        }
        Action::Show { name } => {
            let p = presets::find(&name).ok_or_else(|| CliError::unknown_scenario(&name))?;
            return Ok(serde_json::to_string_pretty(&p.config).expect("config serializes"));
        }
    };
    let config = match (&args.config, &args.preset) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(name)) => ScenarioConfig::named(name),
        (None, None) => unreachable!("clap requires one of --config or --preset"),
    };
    let (manifest, path) = cqed_cli::run(command, &config, args.seed, args.out.as_deref())?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    Ok(path.display().to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
