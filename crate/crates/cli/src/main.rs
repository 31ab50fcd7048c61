use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fockline::CoincidenceMode;

mod commands;
mod grid;
mod render;

use grid::Spec;

#[derive(Parser, Debug)]
#[command(
    name = "fockline",
    version,
    about = "Fock-space simulator for a heralded polarization-singlet source"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Strict,
    Lenient,
}

impl From<Mode> for CoincidenceMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strict => CoincidenceMode::Strict,
            Mode::Lenient => CoincidenceMode::Lenient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(clap::Args, Debug)]
pub struct Common {
    /// Coincidence reading of the herald pairs.
    #[arg(long, value_enum, default_value_t = Mode::Strict)]
    coincidence: Mode,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Heralding statistics at one (epsilon, eta) point.
    Run {
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Spec,
        #[arg(long, default_value = "1.0")]
        eta: Spec,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// One row per (epsilon, eta) grid point.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Spec,
        #[arg(long, default_value = "1.0")]
        eta: Spec,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Component priors and their share of the coincidence rate.
    Components {
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Spec,
        #[arg(long, default_value = "1.0")]
        eta: Spec,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Evolve an arbitrary circuit and input, then detect.
    Circuit {
        /// Circuit JSON file.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        circuit: Option<PathBuf>,
        /// Built-in circuit by name.
        #[arg(long)]
        preset: Option<String>,
        /// Input state JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Detector bank JSON file.
        #[arg(long)]
        detectors: PathBuf,
        /// Heralding set of detector ids joined by '+', e.g. D1+D4. Repeatable.
        #[arg(long)]
        accept: Vec<String>,
        /// Comma-separated paths kept in the conditional state.
        #[arg(long, value_delimiter = ',')]
        keep: Vec<String>,
        /// Bell state on the two kept paths to report fidelity against.
        #[arg(long, value_parser = ["phi+", "phi-", "psi+", "psi-"])]
        target: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification checklist.
    Verify {
        /// Only this criterion (id or name). Repeatable.
        #[arg(long)]
        criterion: Vec<String>,
        /// Print every check, not only failures.
        #[arg(long, short)]
        verbose: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use an unbalanced beam splitter in the element checks.
        #[arg(long, hide = true)]
        tamper_bs: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            epsilon,
            eta,
            format,
            common,
        } => commands::run(epsilon, eta, format, &common),
        Command::Sweep {
            epsilon,
            eta,
            format,
            common,
        } => commands::sweep(epsilon, eta, format, &common),
        Command::Components {
            epsilon,
            eta,
            format,
            common,
        } => commands::components(epsilon, eta, format, &common),
        Command::Circuit {
            circuit,
            preset,
            input,
            detectors,
            accept,
            keep,
            target,
            format,
            common,
        } => commands::circuit(commands::CircuitArgs {
            circuit,
            preset,
            input,
            detectors,
            accept,
            keep,
            target,
            format,
            common: &common,
        }),
        Command::Verify {
            criterion,
            verbose,
            out,
            tamper_bs,
        } => commands::verify(&criterion, verbose, out.as_deref(), tamper_bs),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
