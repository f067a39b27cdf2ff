use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qfound_core::bell::{ChshSettings, LhvModel};
use qfound_core::suites::{self, Config, Context, Suite, DEFAULT_SEED};

/// Verification suites for a finite-dimensional model of composite quantum
/// systems.
#[derive(Debug, Parser)]
#[command(name = "qfound", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration with per-suite sections.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for every random draw; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplies the documented tolerances.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mereology laws, Galilei structure constants and representations.
    Axioms,
    /// Permutation operators, symmetrizers and exclusion.
    Symmetry,
    /// N-body Hamiltonians and time evolution.
    Dynamics,
    /// Charge superselection sectors.
    Charge,
    /// Correlated pair with sharp separation and total momentum.
    Epr,
    /// CHSH correlations for the singlet and hidden-variable models.
    Bell(BellArgs),
    /// Every suite in one report.
    All,
}

#[derive(Debug, Args)]
struct BellArgs {
    /// Analyzer angles α,α′,β,β′ in radians.
    #[arg(long, value_name = "A,A',B,B'")]
    angles: Option<ChshSettings>,
    /// Hidden-variable samples per model.
    #[arg(long)]
    samples: Option<usize>,
    /// Restrict to one hidden-variable model.
    #[arg(long)]
    model: Option<LhvModel>,
}

fn run(cli: Cli) -> Result<bool, String> {
    let mut config = match &cli.common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            Config::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => Config::default(),
    };
    let suite = match &cli.command {
        Command::Axioms => Suite::Axioms,
        Command::Symmetry => Suite::Symmetry,
        Command::Dynamics => Suite::Dynamics,
        Command::Charge => Suite::Charge,
        Command::Epr => Suite::Epr,
        Command::Bell(args) => {
            if let Some(angles) = args.angles {
                config.bell.angles = angles;
            }
            if let Some(n) = args.samples {
                config.bell.n_samples = n;
            }
            if let Some(model) = args.model {
                config.bell.models = vec![model];
            }
            Suite::Bell
        }
        Command::All => Suite::All,
    };
    let seed = cli.common.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let ctx = Context { seed, tolerance_scale: cli.common.tolerance_scale };
    let report = suites::run(suite, &config, &ctx).map_err(|e| e.to_string())?;
    let text = match cli.common.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    match &cli.common.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("qfound: {message}");
            ExitCode::from(2)
        }
    }
}
