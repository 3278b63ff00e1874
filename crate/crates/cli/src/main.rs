use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cat0_core::experiments::{
    failure_report, list_scenarios, run_scenario, template, validate_scenario, RunOptions, Scenario,
};
use clap::{Parser, Subcommand};

/// Runs boundary and asymptotic-cone experiments from JSON scenarios.
///
/// Exit status: 0 when every check passes, 1 when a check fails or a
/// computation does not converge, 2 on invalid input.
#[derive(Parser)]
#[command(name = "cat0", version)]
struct Cli {
    /// Default convergence tolerance for scenarios that do not set
    /// `tolerances.convergence`.
    #[arg(long, global = true, env = "CAT0_TOLERANCE")]
    tolerance: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in scenario templates.
    List,
    /// Print a built-in scenario as JSON.
    Template { name: String },
    /// Check a scenario file without running it.
    Validate { scenario: PathBuf },
    /// Run a scenario and write report.json and rows.csv.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

const FAIL: u8 = 1;
const INVALID: u8 = 2;

fn invalid(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(INVALID)
}

fn load(path: &Path) -> Result<Scenario, ExitCode> {
    Scenario::load(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { default_tolerance: cli.tolerance };
    match cli.command {
        Command::List => {
            for t in list_scenarios() {
                println!("{:<20} {}", t.name, t.description);
            }
            ExitCode::SUCCESS
        }
        Command::Template { name } => match template(&name).map(|s| s.to_json()) {
            Some(Ok(json)) => {
                println!("{json}");
                ExitCode::SUCCESS
            }
            Some(Err(e)) => invalid(e),
            None => invalid(format!("no template named `{name}`; see `cat0 list`")),
        },
        Command::Validate { scenario } => {
            let s = match load(&scenario) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match validate_scenario(&s, opts) {
                Ok(()) => {
                    println!("{}: valid {} scenario", scenario.display(), s.operation);
                    ExitCode::SUCCESS
                }
                Err(e) => invalid(e),
            }
        }
        Command::Run { scenario, out } => {
            let s = match load(&scenario) {
                Ok(s) => s,
                Err(code) => return code,
            };
            if let Err(e) = validate_scenario(&s, opts) {
                return invalid(e);
            }
            let report = match run_scenario(&s, opts) {
                Ok(r) => r,
                Err(e) if e.is_input_error() => return invalid(e),
                Err(e) => failure_report(&s, &e),
            };
            if let Err(e) = report.write_to(&out) {
                return invalid(e);
            }
            for c in &report.summary {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{} rows written to {}", report.rows.len(), out.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(FAIL)
            }
        }
    }
}
