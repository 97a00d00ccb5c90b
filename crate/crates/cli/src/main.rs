use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use neoms_cli::output::Format;
use neoms_cli::{run, Command, Invocation, Overrides, Request, EXIT_CONFIG};

/// Steady states, stability and hysteresis of a cavity with a
/// Coulomb-coupled moving mirror.
#[derive(Parser)]
#[command(name = "neoms", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Config file (`key = value` lines); reference values otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Lowest grid power, with unit (e.g. `0 W`).
    #[arg(long, global = true)]
    pmin: Option<String>,
    /// Highest grid power, with unit (e.g. `5 nW`).
    #[arg(long, global = true)]
    pmax: Option<String>,
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Family parameter: g0, gc, delta_c, eps1, eps2, phi1, phi2.
    #[arg(long, global = true)]
    vary: Option<String>,
    /// Comma-separated values with units.
    #[arg(long, global = true, allow_hyphen_values = true)]
    values: Option<String>,
    /// `half-kappa` or `kappa`.
    #[arg(long, global = true)]
    convention: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Sub {
    /// Photon number against pump power, every root with its stability.
    Curve,
    /// Fold powers and photon numbers.
    Window,
    /// Up and down sweeps (analytic, dynamic or both).
    Hysteresis,
    /// One curve per value of a varied parameter.
    Family,
    /// Mirror displacements against pump power.
    Mirror,
    /// Time trace from the empty cavity at the configured power.
    Dynamics,
    /// Critical detuning.
    Threshold,
    /// Figure preset (2 to 8, panels such as 6b).
    Fig { id: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let invocation = match cli.command {
        Sub::Curve => Invocation::Run(Command::Curve),
        Sub::Window => Invocation::Run(Command::Window),
        Sub::Hysteresis => Invocation::Run(Command::Hysteresis),
        Sub::Family => Invocation::Run(Command::Family),
        Sub::Mirror => Invocation::Run(Command::Mirror),
        Sub::Dynamics => Invocation::Run(Command::Dynamics),
        Sub::Threshold => Invocation::Run(Command::Threshold),
        Sub::Fig { id } => Invocation::Fig(id),
    };
    let config_text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("neoms: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => None,
    };
    let request = Request {
        invocation,
        config_text,
        overrides: Overrides {
            pmin: cli.pmin,
            pmax: cli.pmax,
            points: cli.points,
            vary: cli.vary,
            values: cli.values,
            convention: cli.convention,
        },
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
    };
    let outcome = run(&request);
    for m in &outcome.messages {
        eprintln!("neoms: {m}");
    }
    if !outcome.bytes.is_empty() {
        let written = match &cli.out {
            Some(path) => std::fs::write(path, &outcome.bytes),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(&outcome.bytes)
            }
        };
        if let Err(e) = written {
            eprintln!("neoms: cannot write output: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    ExitCode::from(outcome.exit_code)
}
