use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsector::Exec;
use qsector_cli::report::{format_report, plural, Mode};
use qsector_cli::runner::{run, RunOptions, DEFAULT_TOL, TOL_ENV};
use qsector_cli::{demos, parse, selftest, ScenarioError};

#[derive(Parser)]
#[command(name = "qsector", version, about = "Run and check quantum-probability scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, check and execute a scenario file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        opts: Flags,
    },
    /// Parse and check a scenario file without executing it.
    Check { file: PathBuf },
    /// Run a built-in fixture: qubit-born, two-sector or mppc-fail.
    Demo {
        name: String,
        #[command(flatten)]
        opts: Flags,
    },
    /// Run the seeded property battery.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args)]
struct Flags {
    /// Emit the machine-readable JSON report.
    #[arg(long)]
    json: bool,
    /// Default tolerance for every check.
    #[arg(long, env = TOL_ENV, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Seed for random builtins.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Record wall-clock time per query.
    #[arg(long)]
    timings: bool,
    /// Execute queries one at a time.
    #[arg(long)]
    sequential: bool,
}

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn report_error(origin: &str, e: &ScenarioError) -> ExitCode {
    eprintln!("{origin}:{e}");
    ExitCode::from(2)
}

fn execute(origin: &str, src: &str, flags: &Flags) -> ExitCode {
    if !(flags.tol.is_finite() && flags.tol >= 0.0) {
        eprintln!("tolerance must be a non-negative number, got {}", flags.tol);
        return ExitCode::from(2);
    }
    let program = match parse(src) {
        Ok(p) => p,
        Err(e) => return report_error(origin, &e),
    };
    let opts = RunOptions { tol: flags.tol, seed: flags.seed, exec: exec(flags.sequential), timings: flags.timings };
    let report = run(&program, &opts);
    print!("{}", format_report(&report, if flags.json { Mode::Machine } else { Mode::Human }));
    ExitCode::from(report.exit_code() as u8)
}

fn read(file: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(file).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, opts } => match read(&file) {
            Ok(src) => execute(&file.display().to_string(), &src, &opts),
            Err(code) => code,
        },
        Command::Check { file } => {
            let src = match read(&file) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match parse(&src) {
                Ok(p) => {
                    println!(
                        "{}: ok ({}, {})",
                        file.display(),
                        plural(p.declaration_count(), "declaration", "declarations"),
                        plural(p.query_count(), "query", "queries")
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => report_error(&file.display().to_string(), &e),
            }
        }
        Command::Demo { name, opts } => match demos::source(&name) {
            Some(src) => execute(&name, src, &opts),
            None => {
                eprintln!("unknown demo `{name}` (available: {})", demos::names().collect::<Vec<_>>().join(", "));
                ExitCode::from(2)
            }
        },
        Command::Selftest { seed, sequential } => {
            let results = selftest::run_all(seed, exec(sequential));
            let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
            for r in &results {
                println!(
                    "{} {:width$}  worst {:.3e}  tolerance {:.1e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.worst,
                    r.tolerance
                );
            }
            let failed = results.iter().filter(|r| !r.pass).count();
            println!("{} checks, {failed} failed", results.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
