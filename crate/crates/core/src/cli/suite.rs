//! Built-in suites: quick sampler/oracle checks and the bundled paper specs.

use std::path::Path;

use crate::barrier::CurveSpec;
use crate::decorations::DecorationFamily;
use crate::estimators::stats::{Moments, MomentsVec};
use crate::estimators::{estimate_bridge_crossing, estimate_survival, run_replicas, BarrierExperiment};
use crate::estimators::{Estimate, RunConfig, Verdict, CI_SIGMAS};
use crate::oracles::{ballot_survival, bridge_marginal, bridge_max_tail, BridgeEndpoints};
use crate::rng::{lanes, RngStream};
use crate::sampling::{sample_bridge, sample_ppp, PppConfig};

use super::csv::{self, ResultRow};
use super::experiment::{default_workers, resolve_seed};
use super::{run_spec_text, write, CliError, Outcome, RunOptions};

/// The bundled reproduction specs.
pub const PAPER_SPECS: &str = include_str!("../../specs/paper.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteWhich {
    Unit,
    Paper,
    All,
}

impl SuiteWhich {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unit" => Some(SuiteWhich::Unit),
            "paper" => Some(SuiteWhich::Paper),
            "all" => Some(SuiteWhich::All),
            _ => None,
        }
    }
}

const UNIT_N: u64 = 200_000;

struct UnitRows<'a> {
    seed: u64,
    workers: usize,
    rows: &'a mut Vec<ResultRow>,
}

impl UnitRows<'_> {
    fn push(&mut self, kind: &str, estimate: f64, std_error: f64, verdict: Verdict, t: Option<f64>) {
        self.rows.push(ResultRow {
            experiment: "unit".to_string(),
            kind: kind.to_string(),
            x: None,
            y: None,
            t,
            s: None,
            lambda: None,
            delta: None,
            margin: None,
            n: UNIT_N,
            estimate,
            std_error,
            seed: self.seed,
            workers: self.workers,
            wall_time: 0.0,
            verdict,
        });
    }
}

/// Sampler and oracle cross-checks, each a few seconds at most.
pub fn unit_rows(seed: u64, workers: usize) -> Result<Vec<ResultRow>, CliError> {
    let run = RunConfig::new(seed, workers);
    let mut rows = Vec::new();
    let mut out = UnitRows {
        seed,
        workers,
        rows: &mut rows,
    };

    // bridge marginal at the midpoint of [0, 4]
    let ends = BridgeEndpoints::new(0.0, 0.0, 4.0)?;
    let (mean, var) = bridge_marginal(&ends, 2.0)?;
    let (m, _) = run_replicas(UNIT_N, &run, |i, acc: &mut Moments| {
        let mut rng = RngStream::new(seed, i).lane(lanes::PATH).generator();
        let p = sample_bridge(0.0, 0.0, 4.0, &[2.0], &mut rng).expect("valid bridge input");
        acc.push(p.values[0]);
    })?;
    let se = m.std_error();
    out.push(
        "bridge_mean",
        m.mean(),
        se,
        Verdict::from_bool((m.mean() - mean).abs() <= CI_SIGMAS * se),
        Some(4.0),
    );
    let var_se = var * (2.0 / UNIT_N as f64).sqrt();
    out.push(
        "bridge_variance",
        m.variance(),
        var_se,
        Verdict::from_bool((m.variance() - var).abs() <= CI_SIGMAS * var_se),
        Some(4.0),
    );

    // Poisson counts on [0, 10] at rate 2
    let ppp = PppConfig::new(2.0)?;
    let (c, _) = run_replicas(UNIT_N, &run, |i, acc: &mut MomentsVec| {
        let mut rng = RngStream::new(seed, i).lane(lanes::ARRIVALS).generator();
        let k = sample_ppp(&ppp, 10.0, &mut rng).expect("valid horizon").len() as f64;
        acc.push_all(&[k]);
    })?;
    let counts = &c.0[0];
    out.push(
        "ppp_count_mean",
        counts.mean(),
        counts.std_error(),
        Verdict::from_bool((counts.mean() - 20.0).abs() <= CI_SIGMAS * counts.std_error()),
        Some(10.0),
    );

    // reflection identity with crossing corrections
    let ends = BridgeEndpoints::new(0.0, 0.0, 2.0)?;
    let e = estimate_bridge_crossing(&ends, 1.0, 0.01, UNIT_N, &run)?;
    let exact = bridge_max_tail(1.0, 2.0)?;
    out.push(
        "reflection",
        e.value,
        e.std_error,
        Verdict::from_bool(e.within(exact, CI_SIGMAS)),
        Some(2.0),
    );

    // dense observation approaches the ballot value from above
    let exp = BarrierExperiment::new(
        BridgeEndpoints::new(-1.0, -1.0, 2.0)?,
        PppConfig::new(200.0)?,
        CurveSpec::constant(0.25, 0.0)?,
        DecorationFamily::zero(0.25),
    );
    let e: Estimate = estimate_survival(&exp, UNIT_N, &run)?;
    let ballot = ballot_survival(&exp.endpoints);
    out.push(
        "ballot_dense",
        e.value,
        e.std_error,
        Verdict::from_bool(e.value >= ballot - CI_SIGMAS * e.std_error && e.value <= 0.70),
        Some(2.0),
    );
    Ok(rows)
}

/// Runs a suite, writing one CSV per experiment (and `unit.csv`) into `out`.
pub fn suite(which: SuiteWhich, opts: &RunOptions, out: &Path) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::default();
    if matches!(which, SuiteWhich::Unit | SuiteWhich::All) {
        let seed = resolve_seed(opts.seed, None)?;
        let rows = unit_rows(seed, opts.workers.unwrap_or_else(default_workers).max(1))?;
        let path = out.join("unit.csv");
        write(&path, &csv::render(&rows))?;
        outcome.files.push(path);
        outcome.rows.extend(rows);
    }
    if matches!(which, SuiteWhich::Paper | SuiteWhich::All) {
        let paper = run_spec_text(PAPER_SPECS, opts, out, false)?;
        outcome.files.extend(paper.files);
        outcome.rows.extend(paper.rows);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_spec;

    #[test]
    fn unit_checks_pass() {
        let rows = unit_rows(42, 4).unwrap();
        assert_eq!(rows.len(), 5);
        for r in &rows {
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        }
    }

    #[test]
    fn paper_specs_parse() {
        let specs = parse_spec(PAPER_SPECS).unwrap();
        assert!(specs.iter().any(|s| s.name == "ballot_check"));
    }
}
