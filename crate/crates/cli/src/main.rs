use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use newsvendor::randopt::RhsMode;
use newsvendor_cli::{run, Command, Options};

/// Newsvendor analysis with randomized order quantities.
///
/// Exit status: 0 ok, 2 missing file, 3 invalid scenario or configuration,
/// 4 numerical integrity failure, 5 validation failure. Invalid command-line
/// arguments also exit with 3.
#[derive(Parser)]
#[command(name = "newsvendor", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Benchmark solution under estimated, compound and true demand.
    Solve(Common),
    /// Search an order-distribution family for a policy that beats Q̂*.
    Search(Common),
    /// Cross-check analytic values against Monte-Carlo simulation.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    scenario: PathBuf,
    /// Write the report as JSON.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write the search trace as CSV.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Write the scenario with defaults filled in and samples inlined.
    #[arg(long, value_name = "PATH")]
    dump_normalized: Option<PathBuf>,
    /// Baseline profit form: `theorem` or `exact`.
    #[arg(long, value_name = "MODE")]
    rhs_mode: Option<RhsMode>,
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    inject_bias: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the configuration status; help and version exit 0
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let (command, c) = match cli.command {
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Search(c) => (Command::Search, c),
        Cmd::Validate(c) => (Command::Validate, c),
    };
    let opts = Options {
        json: c.json,
        trace: c.trace,
        dump_normalized: c.dump_normalized,
        rhs_mode: c.rhs_mode,
        inject_bias: c.inject_bias,
    };
    match run(command, &c.scenario, &opts) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let newsvendor_cli::CliError::ValidationFailed { table, .. } = &e {
                print!("{table}");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
