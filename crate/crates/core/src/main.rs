use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use barrier_mc::cli::{self, CliError, Outcome, RunOptions, SuiteWhich};

#[derive(Parser)]
#[command(
    name = "barrier-mc",
    version,
    about = "Poisson-observed Brownian bridge barrier experiments"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Unit,
    Paper,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a spec file.
    Run {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also write a log-log SVG next to each CSV.
        #[arg(long)]
        plot: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Record wall times (CSVs are then no longer byte-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Re-run the experiments of a CSV with its recorded seeds and compare.
    Replay { csv: PathBuf, spec: PathBuf },
    /// Run the built-in checks and/or the bundled paper specs.
    Suite {
        which: Which,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "suite-results")]
        out: PathBuf,
    },
    /// Regenerate the SVG plot of a result CSV.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn report(outcome: &Outcome) -> i32 {
    print!("{}", outcome.verdict_table());
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    outcome.exit_code()
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run {
            spec,
            seed,
            workers,
            plot,
            out,
            timing,
        } => {
            let opts = RunOptions {
                seed,
                workers,
                timing,
            };
            Ok(report(&cli::run(&spec, &opts, &out, plot)?))
        }
        Command::Replay { csv, spec } => {
            let r = cli::replay(&csv, &spec)?;
            for m in &r.mismatches {
                println!("FAIL {m}");
            }
            println!("replay {}: {} rows checked", r.verdict().as_str(), r.rows_checked);
            Ok(if r.mismatches.is_empty() {
                cli::EXIT_OK
            } else {
                cli::EXIT_FAIL
            })
        }
        Command::Suite {
            which,
            seed,
            workers,
            out,
        } => {
            let which = match which {
                Which::Unit => SuiteWhich::Unit,
                Which::Paper => SuiteWhich::Paper,
                Which::All => SuiteWhich::All,
            };
            let opts = RunOptions {
                seed,
                workers,
                timing: false,
            };
            Ok(report(&cli::suite(which, &opts, &out)?))
        }
        Command::Plot { csv, out } => {
            let path = cli::plot(&csv, out.as_deref())?;
            println!("wrote {}", path.display());
            Ok(cli::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = dispatch(args.command).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
