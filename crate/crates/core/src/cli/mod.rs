//! Config-driven experiment runner behind the `barrier-mc` binary.
//!
//! Exit codes: 0 success, 1 at least one FAIL verdict (or a failed replay),
//! 2 spec parse error or bad command line, 3 configuration error, 4 runtime
//! error (estimator domain errors, I/O), 5 replay schema mismatch.

pub mod config;
pub mod csv;
pub mod experiment;
pub mod suite;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::estimators::Verdict;

pub use config::{parse_spec, ExperimentKind, ExperimentSpec};
pub use csv::ResultRow;
pub use experiment::{resolve_seed, run_experiment, RunOptions, DEFAULT_SEED, SEED_ENV};
pub use suite::{suite, SuiteWhich};
pub use svg::svg_from_csv;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;
pub const EXIT_SCHEMA: i32 = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("replay schema mismatch: {0}")]
    Schema(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Schema(_) => EXIT_SCHEMA,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { field, message } => CliError::Config { field, message },
            Error::Domain(m) => CliError::Runtime(m),
        }
    }
}

pub(crate) fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub(crate) fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Rows and written files of a `run` or `suite` invocation.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| r.verdict == Verdict::Fail) {
            EXIT_FAIL
        } else {
            EXIT_OK
        }
    }

    /// One line per row carrying a verdict other than N/A.
    pub fn verdict_table(&self) -> String {
        let mut out = String::new();
        for r in self.rows.iter().filter(|r| r.verdict != Verdict::NotApplicable) {
            out.push_str(&format!(
                "{:<13} {:<28} {:<26} {:.6e} ± {:.2e}\n",
                r.verdict.as_str(),
                r.experiment,
                r.kind,
                r.estimate,
                r.std_error
            ));
        }
        out
    }
}

/// Runs every experiment of a spec, writing `<out>/<name>.csv` (and `.svg`
/// with `plot`) as each finishes.
pub fn run_spec_text(text: &str, opts: &RunOptions, out: &Path, plot: bool) -> Result<Outcome, CliError> {
    let specs = parse_spec(text)?;
    let mut outcome = Outcome::default();
    for spec in &specs {
        let rows = run_experiment(spec, opts)?;
        let csv_text = csv::render(&rows);
        let path = out.join(format!("{}.csv", spec.name));
        write(&path, &csv_text)?;
        outcome.files.push(path);
        if plot {
            let path = out.join(format!("{}.svg", spec.name));
            write(&path, &svg_from_csv(&csv_text)?)?;
            outcome.files.push(path);
        }
        outcome.rows.extend(rows);
    }
    Ok(outcome)
}

pub fn run(spec_file: &Path, opts: &RunOptions, out: &Path, plot: bool) -> Result<Outcome, CliError> {
    run_spec_text(&read(spec_file)?, opts, out, plot)
}

/// Regenerates the SVG for a CSV; returns the path written.
pub fn plot(csv_file: &Path, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let svg = svg_from_csv(&read(csv_file)?)?;
    let path = out.map_or_else(|| csv_file.with_extension("svg"), Path::to_path_buf);
    write(&path, &svg)?;
    Ok(path)
}

/// Result of a replay: number of rows compared and one message per mismatch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayOutcome {
    pub rows_checked: usize,
    pub mismatches: Vec<String>,
}

impl ReplayOutcome {
    pub fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.mismatches.is_empty())
    }
}

fn same_f64(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

fn same_opt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => same_f64(a, b),
        _ => false,
    }
}

/// Re-runs every experiment recorded in `csv_text` with its recorded seed and
/// worker count, and compares estimates, standard errors and verdicts bit for
/// bit. Wall times are ignored. Rows that no longer line up structurally
/// (different kinds, parameters or counts) are a schema mismatch.
pub fn replay_text(csv_text: &str, spec_text: &str) -> Result<ReplayOutcome, CliError> {
    let recorded = csv::parse(csv_text)?;
    let specs = parse_spec(spec_text)?;
    let mut names: Vec<&str> = Vec::new();
    for r in &recorded {
        if !names.contains(&r.experiment.as_str()) {
            names.push(&r.experiment);
        }
    }
    let mut outcome = ReplayOutcome::default();
    let mut line = 2;
    for name in names {
        let spec = specs
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CliError::Schema(format!("experiment `{name}` is not in the spec file")))?;
        let old: Vec<&ResultRow> = recorded.iter().filter(|r| r.experiment == name).collect();
        let (seed, workers) = (old[0].seed, old[0].workers);
        if old.iter().any(|r| r.seed != seed || r.workers != workers) {
            return Err(CliError::Schema(format!(
                "experiment `{name}` mixes seeds or worker counts"
            )));
        }
        let opts = RunOptions {
            seed: Some(seed),
            workers: Some(workers),
            timing: false,
        };
        let new = run_experiment(spec, &opts)?;
        if new.len() != old.len() {
            return Err(CliError::Schema(format!(
                "experiment `{name}`: {} rows recorded, {} replayed",
                old.len(),
                new.len()
            )));
        }
        for (o, n) in old.iter().zip(&new) {
            let structural = o.kind == n.kind
                && same_opt(o.x, n.x)
                && same_opt(o.y, n.y)
                && same_opt(o.t, n.t)
                && same_opt(o.s, n.s)
                && same_opt(o.lambda, n.lambda)
                && same_opt(o.delta, n.delta)
                && same_opt(o.margin, n.margin)
                && o.n == n.n;
            if !structural {
                return Err(CliError::Schema(format!(
                    "line {line} ({name}, {}): parameters differ from the spec",
                    o.kind
                )));
            }
            let mut diffs = Vec::new();
            if !same_f64(o.estimate, n.estimate) {
                diffs.push(format!(
                    "estimate {} vs {}",
                    csv::fmt_f64(o.estimate),
                    csv::fmt_f64(n.estimate)
                ));
            }
            if !same_f64(o.std_error, n.std_error) {
                diffs.push(format!(
                    "std_error {} vs {}",
                    csv::fmt_f64(o.std_error),
                    csv::fmt_f64(n.std_error)
                ));
            }
            if o.verdict != n.verdict {
                diffs.push(format!(
                    "verdict {} vs {}",
                    o.verdict.as_str(),
                    n.verdict.as_str()
                ));
            }
            if !diffs.is_empty() {
                outcome.mismatches.push(format!(
                    "line {line} ({name}, {}): recorded vs replayed {}",
                    o.kind,
                    diffs.join("; ")
                ));
            }
            outcome.rows_checked += 1;
            line += 1;
        }
    }
    Ok(outcome)
}

pub fn replay(csv_file: &Path, spec_file: &Path) -> Result<ReplayOutcome, CliError> {
    replay_text(&read(csv_file)?, &read(spec_file)?)
}
