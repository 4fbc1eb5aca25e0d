//! Builds estimator inputs from a spec and turns reports into result rows.

use crate::barrier::{Blend, CurveKind, CurveSpec, Profile};
use crate::decorations::{BaseLaw, DecorationFamily, DecorationKind, TablePiece};
use crate::error::Error;
use crate::estimators::stats::log_log_slope;
use crate::estimators::{
    check_asymptotic, continuity_experiment, estimate_fg, estimate_repulsion, estimate_survival,
    fg_sensitivity, monotonicity_coupled, scan_bound_constant, shifted_family, AsymptoticOptions,
    BarrierExperiment, Estimate, FgSide, RangeRegion, RepulsionConfig, RunConfig, Side, Verdict, DEFAULT_S,
};
use crate::oracles::BridgeEndpoints;
use crate::sampling::PppConfig;

use super::config::{ExperimentKind, ExperimentSpec, Params};
use super::csv::ResultRow;
use super::CliError;

/// Seed used when neither the command line, the spec nor the environment sets one.
pub const DEFAULT_SEED: u64 = 20_240_917;
/// Environment variable consulted last for the master seed.
pub const SEED_ENV: &str = "BARRIER_MC_SEED";
/// Replicas per estimate when the spec does not say.
pub const DEFAULT_N: u64 = 100_000;

/// Command-line overrides for a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Record wall times; off by default so that CSVs are byte-reproducible.
    pub timing: bool,
}

/// `--seed`, then the spec's `seed`, then `BARRIER_MC_SEED`, then [`DEFAULT_SEED`].
pub fn resolve_seed(cli: Option<u64>, spec: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = cli.or(spec) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::from(Error::Config {
                field: SEED_ENV.to_string(),
                message: format!("not an unsigned integer: `{v}`"),
            })
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cfg_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::from(Error::Config {
        field: field.to_string(),
        message: message.into(),
    })
}

fn profile(p: &Params, key: &str) -> Result<Profile, CliError> {
    let v = p.f64_list(key)?;
    match v[..] {
        [c] => Ok(Profile::constant(c)),
        [offset, scale, exponent] => Ok(Profile {
            offset,
            scale,
            exponent,
        }),
        _ => Err(cfg_err(key, "expected [offset] or [offset, scale, exponent]")),
    }
}

fn curve(p: &Params) -> Result<CurveSpec, CliError> {
    let delta = p.f64_or("curve.delta", 0.25)?;
    let kind = match p.str_or("curve.kind", "canonical_plus")?.as_str() {
        "canonical_plus" => CurveKind::CanonicalPlus,
        "constant" => CurveKind::Constant(p.f64("curve.value")?),
        "limit_profile" => CurveKind::LimitProfile {
            plus: profile(p, "curve.plus")?,
            minus: profile(p, "curve.minus")?,
            blend: match p.str_or("curve.blend", "nearest")?.as_str() {
                "nearest" => Blend::Nearest,
                "linear" => Blend::Linear,
                other => return Err(cfg_err("curve.blend", format!("unknown blend `{other}`"))),
            },
        },
        other => return Err(cfg_err("curve.kind", format!("unknown curve kind `{other}`"))),
    };
    let c = CurveSpec::new(delta, kind)?;
    Ok(if p.bool_or("curve.include_one", true)? {
        c
    } else {
        c.without_one()
    })
}

fn base_law(p: &Params, name: &str) -> Result<BaseLaw, CliError> {
    Ok(match name {
        "zero" => BaseLaw::Zero,
        "two_sided_exponential" => BaseLaw::TwoSidedExponential {
            rate: p.f64_or("decorations.rate", 1.0)?,
        },
        "normal" => BaseLaw::Normal {
            sd: p.f64_or("decorations.sd", 1.0)?,
        },
        other => return Err(cfg_err("decorations.base", format!("unknown base law `{other}`"))),
    })
}

fn decorations(p: &Params) -> Result<DecorationFamily, CliError> {
    let tail_delta = p.f64_or("decorations.tail_delta", 0.25)?;
    let kind = match p.str_or("decorations.kind", "zero")?.as_str() {
        "zero" => DecorationKind::Zero,
        "two_sided_exponential" => DecorationKind::TwoSidedExponential {
            rate: p.f64_or("decorations.rate", 1.0)?,
        },
        "limit_shifted" => DecorationKind::LimitShifted {
            base: base_law(p, &p.str_or("decorations.base", "two_sided_exponential")?)?,
            drift_scale: p.f64("decorations.drift_scale")?,
            decay_rate: p.f64_or("decorations.decay_rate", 1.0)?,
        },
        "table" => DecorationKind::Table {
            pieces: vec![TablePiece {
                from: 0.0,
                values: p.f64_list("decorations.values")?,
            }],
        },
        other => {
            return Err(cfg_err(
                "decorations.kind",
                format!("unknown decoration kind `{other}`"),
            ))
        }
    };
    Ok(DecorationFamily::new(tail_delta, kind)?)
}

fn ppp(p: &Params) -> Result<PppConfig, CliError> {
    Ok(PppConfig::new(p.f64("ppp.rate_lambda")?)?)
}

/// Shared row context of one experiment.
struct Rows {
    experiment: String,
    lambda: f64,
    delta: f64,
    n: u64,
    seed: u64,
    workers: usize,
    timing: bool,
    out: Vec<ResultRow>,
}

impl Rows {
    fn push(&mut self, kind: &str, estimate: f64, std_error: f64, verdict: Verdict) -> &mut ResultRow {
        self.out.push(ResultRow {
            experiment: self.experiment.clone(),
            kind: kind.to_string(),
            x: None,
            y: None,
            t: None,
            s: None,
            lambda: Some(self.lambda),
            delta: Some(self.delta),
            margin: None,
            n: self.n,
            estimate,
            std_error,
            seed: self.seed,
            workers: self.workers,
            wall_time: 0.0,
            verdict,
        });
        self.out.last_mut().expect("just pushed")
    }

    fn push_est(&mut self, kind: &str, e: &Estimate, verdict: Verdict) -> &mut ResultRow {
        let timing = self.timing;
        let row = self.push(kind, e.value, e.std_error, verdict);
        if timing {
            row.wall_time = e.wall_time;
        }
        row
    }
}

impl ResultRow {
    fn at(&mut self, x: Option<f64>, y: Option<f64>, t: Option<f64>, s: Option<f64>) -> &mut Self {
        self.x = x;
        self.y = y;
        self.t = t;
        self.s = s;
        self
    }
}

/// Optional `[expect.min, expect.max]` band for a single estimate.
#[derive(Debug, Clone, Copy)]
struct Expect {
    lo: Option<f64>,
    hi: Option<f64>,
}

impl Expect {
    fn read(p: &Params) -> Result<Self, CliError> {
        Ok(Expect {
            lo: p.opt_f64("expect.min")?,
            hi: p.opt_f64("expect.max")?,
        })
    }

    fn verdict(&self, value: f64) -> Verdict {
        if self.lo.is_none() && self.hi.is_none() {
            return Verdict::NotApplicable;
        }
        Verdict::from_bool(self.lo.is_none_or(|l| value >= l) && self.hi.is_none_or(|h| value <= h))
    }
}

fn check_name(name: &str) -> Result<(), CliError> {
    if name.is_empty() || name.contains([',', '\n', '\r', '"', '/', '\\']) {
        return Err(cfg_err(
            name,
            "experiment names must be non-empty and free of commas, quotes, slashes and newlines",
        ));
    }
    Ok(())
}

/// Runs one experiment and returns its rows in a fixed order.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Vec<ResultRow>, CliError> {
    check_name(&spec.name)?;
    let p = &spec.params;
    p.opt_str("kind")?;
    let seed = resolve_seed(opts.seed, p.opt_u64("seed")?)?;
    let spec_workers = p.opt_u64("workers")?.map(|w| w as usize);
    let workers = opts
        .workers
        .or(spec_workers)
        .unwrap_or_else(default_workers)
        .max(1);
    let n = p.u64_or("n", DEFAULT_N)?;
    let run = RunConfig::new(seed, workers);
    let ppp = ppp(p)?;
    let curve = curve(p)?;
    let mut rows = Rows {
        experiment: spec.name.clone(),
        lambda: ppp.rate(),
        delta: curve.delta(),
        n,
        seed,
        workers,
        timing: opts.timing,
        out: Vec::new(),
    };

    match spec.kind {
        ExperimentKind::Survival => {
            let (x, y, t) = (p.f64("endpoints.x")?, p.f64("endpoints.y")?, p.f64("horizon_t")?);
            let exp = BarrierExperiment::new(BridgeEndpoints::new(x, y, t)?, ppp, curve, decorations(p)?);
            let expect = Expect::read(p)?;
            p.finish(spec.kind)?;
            let e = estimate_survival(&exp, n, &run)?;
            rows.push_est("survival", &e, expect.verdict(e.value))
                .at(Some(x), Some(y), Some(t), None);
        }
        ExperimentKind::Fg => {
            let side = match p.str_or("fg.side", "start")?.as_str() {
                "start" => Side::Start,
                "end" => Side::End,
                other => {
                    return Err(cfg_err(
                        "fg.side",
                        format!("expected start or end, got `{other}`"),
                    ))
                }
            };
            let x = p.f64("x")?;
            let s = p.f64_or("s", DEFAULT_S)?;
            let s_list = p.opt_f64_list("s_list")?;
            let expect = Expect::read(p)?;
            let exp =
                BarrierExperiment::new(BridgeEndpoints::new(0.0, 0.0, 1.0)?, ppp, curve, decorations(p)?);
            p.finish(spec.kind)?;
            let cfg = FgSide {
                side,
                s_horizon: s,
                x_start: x,
            };
            let e = estimate_fg(&cfg, &exp, n, &run)?;
            let verdict = expect.verdict(e.value);
            let label = if side == Side::Start { "fg.f" } else { "fg.g" };
            rows.push_est(label, &e, verdict).at(Some(x), None, None, Some(s));
            if x < 0.0 {
                rows.push(
                    &format!("{label}.per_unit"),
                    e.value / -x,
                    e.std_error / -x,
                    Verdict::NotApplicable,
                )
                .at(Some(x), None, None, Some(s));
            }
            if let Some(list) = s_list {
                for (si, es) in fg_sensitivity(side, x, &list, &exp, n, &run)? {
                    rows.push_est(&format!("{label}.sensitivity"), &es, Verdict::NotApplicable)
                        .at(Some(x), None, None, Some(si));
                }
            }
        }
        ExperimentKind::Monotonicity => {
            let (x, y, t) = (p.f64("endpoints.x")?, p.f64("endpoints.y")?, p.f64("horizon_t")?);
            let hi = (p.f64("monotonicity.x_hi")?, p.f64("monotonicity.y_hi")?);
            let exp = BarrierExperiment::new(BridgeEndpoints::new(x, y, t)?, ppp, curve, decorations(p)?);
            p.finish(spec.kind)?;
            let r = monotonicity_coupled(&exp, hi, n, &run)?;
            rows.push_est("monotonicity.low", &r.survival_low, Verdict::NotApplicable)
                .at(Some(x), Some(y), Some(t), None);
            rows.push_est("monotonicity.high", &r.survival_high, Verdict::NotApplicable)
                .at(Some(hi.0), Some(hi.1), Some(t), None);
            rows.push("monotonicity.violations", r.violations as f64, 0.0, r.verdict)
                .at(Some(x), Some(y), Some(t), None);
        }
        ExperimentKind::Asymptotic => {
            let (x, y) = (p.f64("endpoints.x")?, p.f64("endpoints.y")?);
            let t_grid = p.f64_list("t_grid")?;
            let s = p.f64_or("s", DEFAULT_S)?;
            let opts = AsymptoticOptions {
                tol: p.f64_or("tol", 0.2)?,
                epsilon: p.f64_or("epsilon", 0.1)?,
            };
            let t0 = t_grid[0];
            let exp = BarrierExperiment::new(BridgeEndpoints::new(x, y, t0)?, ppp, curve, decorations(p)?);
            p.finish(spec.kind)?;
            let r = check_asymptotic(&exp, x, y, &t_grid, s, n, &run, &opts)?;
            rows.push_est("asymptotic.f", &r.f, Verdict::NotApplicable)
                .at(Some(x), None, None, Some(s));
            rows.push_est("asymptotic.g", &r.g, Verdict::NotApplicable)
                .at(None, Some(y), None, Some(s));
            rows.push(
                "asymptotic.2fg",
                r.fg_product(),
                r.fg_product_se(),
                Verdict::NotApplicable,
            )
            .at(Some(x), Some(y), None, Some(s));
            let last = r.rows.len() - 1;
            for (i, row) in r.rows.iter().enumerate() {
                let at = (Some(x), Some(y), Some(row.t), Some(s));
                rows.push_est("asymptotic.survival", &row.survival, Verdict::NotApplicable)
                    .at(at.0, at.1, at.2, at.3);
                rows.push(
                    "asymptotic.scaled",
                    row.scaled,
                    row.scaled_se,
                    Verdict::NotApplicable,
                )
                .at(at.0, at.1, at.2, at.3);
                let v = if i == last {
                    r.verdict
                } else {
                    Verdict::NotApplicable
                };
                rows.push("asymptotic.ratio", row.ratio, row.ratio_se, v)
                    .at(at.0, at.1, at.2, at.3);
            }
        }
        ExperimentKind::BoundScan => {
            let xs = p.f64_list("x_list")?;
            let ys = p.f64_list("y_list")?;
            let ts = p.f64_list("t_list")?;
            let region = RangeRegion::new(p.f64_or("epsilon", 0.1)?)?;
            let template = BarrierExperiment::new(
                BridgeEndpoints::new(xs[0], ys[0], ts[0])?,
                ppp,
                curve,
                decorations(p)?,
            );
            p.finish(spec.kind)?;
            let scan = scan_bound_constant(&template, &region, &xs, &ys, &ts, n, &run)?;
            for c in &scan.cells {
                let at = (Some(c.x), Some(c.y), Some(c.t));
                rows.push_est("bound_scan.survival", &c.survival, Verdict::NotApplicable)
                    .at(at.0, at.1, at.2, None);
                rows.push("bound_scan.ratio", c.ratio, c.ratio_se, Verdict::NotApplicable)
                    .at(at.0, at.1, at.2, None);
                if let Some((m, m_se)) = c.mixed_ratio {
                    rows.push("bound_scan.mixed_ratio", m, m_se, Verdict::NotApplicable)
                        .at(at.0, at.1, at.2, None);
                }
            }
            rows.push("bound_scan.C", scan.c_hat, 0.0, Verdict::NotApplicable);
            if let Some(c) = scan.c_prime_hat {
                rows.push("bound_scan.C_mixed", c, 0.0, Verdict::NotApplicable);
            }
            for tr in &scan.trends {
                let kind = if tr.mixed {
                    "bound_scan.mixed_slope"
                } else {
                    "bound_scan.slope"
                };
                let (v, se) = tr.slope.map_or((f64::NAN, f64::NAN), |s| (s.slope, s.std_error));
                rows.push(kind, v, se, tr.verdict)
                    .at(Some(tr.x), Some(tr.y), None, None);
            }
        }
        ExperimentKind::Repulsion => {
            let (x, y, t) = (p.f64("endpoints.x")?, p.f64("endpoints.y")?, p.f64("horizon_t")?);
            let margin = p.f64_or("repulsion.margin", 1.0)?;
            let step = p.f64_or("repulsion.grid_step", 0.5)?;
            let refine = p.bool_or("repulsion.refine", false)?;
            let s_list = p.f64_list("s_list")?;
            let exp = BarrierExperiment::new(BridgeEndpoints::new(x, y, t)?, ppp, curve, decorations(p)?);
            p.finish(spec.kind)?;
            let mut scaled = Vec::new();
            for &s in &s_list {
                let rc = RepulsionConfig::new(margin, s, step)?;
                let r = estimate_repulsion(&exp, &rc, n, &run)?;
                let timing = rows.timing;
                let row = rows.push(
                    "repulsion.conditional",
                    r.conditional,
                    r.conditional_se,
                    r.verdict,
                );
                row.at(Some(x), Some(y), Some(t), Some(s)).margin = Some(margin);
                if timing {
                    row.wall_time = r.survival.wall_time;
                }
                let (sc, sc_se) = r.scaled();
                rows.push("repulsion.scaled", sc, sc_se, Verdict::NotApplicable)
                    .at(Some(x), Some(y), Some(t), Some(s))
                    .margin = Some(margin);
                scaled.push((s, sc, sc_se));
                if refine {
                    let fine =
                        estimate_repulsion(&exp, &RepulsionConfig::new(margin, s, step / 2.0)?, n, &run)?;
                    let band = r.conditional_se.max(fine.conditional_se);
                    let v = Verdict::from_bool((fine.conditional - r.conditional).abs() < band);
                    rows.push("repulsion.refined", fine.conditional, fine.conditional_se, v)
                        .at(Some(x), Some(y), Some(t), Some(s))
                        .margin = Some(margin);
                }
            }
            if scaled.len() >= 2 {
                let (ss, vals, ses): (Vec<f64>, Vec<f64>, Vec<f64>) = (
                    scaled.iter().map(|v| v.0).collect(),
                    scaled.iter().map(|v| v.1).collect(),
                    scaled.iter().map(|v| v.2).collect(),
                );
                let (v, se, verdict) = match log_log_slope(&ss, &vals, &ses) {
                    Some(sl) => (sl.slope, sl.std_error, Verdict::from_bool(sl.non_increasing())),
                    None => (f64::NAN, f64::NAN, Verdict::Inconclusive),
                };
                rows.push("repulsion.slope", v, se, verdict)
                    .at(Some(x), Some(y), Some(t), None)
                    .margin = Some(margin);
            }
        }
        ExperimentKind::Continuity => {
            let xs = p.f64_list("x_list")?;
            let s = p.f64_or("s", 20.0)?;
            let levels = p.u64_or("continuity.levels", 6)? as usize;
            let shift = p.f64_or("continuity.shift", 1.0)?;
            let decay = p.f64_or("continuity.decay_rate", 1.0)?;
            let tol = p.f64_or("tol", 0.02)?;
            let tail_delta = p.f64_or("decorations.tail_delta", 0.25)?;
            let base = base_law(p, &p.str_or("decorations.kind", "two_sided_exponential")?)?;
            p.finish(spec.kind)?;
            let (members, limit) = shifted_family(base, tail_delta, shift, decay, levels, &curve)?;
            let report = continuity_experiment(&members, &limit, &ppp, &xs, s, n, &run, tol)?;
            for pt in &report.points {
                let at = (Some(pt.x), None, None, Some(s));
                let last = pt.rows.len().saturating_sub(1);
                for row in &pt.rows {
                    rows.push_est(
                        &format!("continuity.f.r{}", row.r),
                        &row.f,
                        Verdict::NotApplicable,
                    )
                    .at(at.0, at.1, at.2, at.3);
                    let v = if row.r == last {
                        pt.f_verdict
                    } else {
                        Verdict::NotApplicable
                    };
                    rows.push(
                        &format!("continuity.f_gap.r{}", row.r),
                        row.f_gap.0,
                        row.f_gap.1,
                        v,
                    )
                    .at(at.0, at.1, at.2, at.3);
                }
                rows.push_est("continuity.f.limit", &pt.f_limit, Verdict::NotApplicable)
                    .at(at.0, at.1, at.2, at.3);
                for row in &pt.rows {
                    rows.push_est(
                        &format!("continuity.g.r{}", row.r),
                        &row.g,
                        Verdict::NotApplicable,
                    )
                    .at(at.0, at.1, at.2, at.3);
                    rows.push(
                        &format!("continuity.g_gap.r{}", row.r),
                        row.g_gap.0,
                        row.g_gap.1,
                        Verdict::NotApplicable,
                    )
                    .at(at.0, at.1, at.2, at.3);
                }
                rows.push_est("continuity.g.limit", &pt.g_limit, Verdict::NotApplicable)
                    .at(at.0, at.1, at.2, at.3);
                let ident = if pt.g_identical { 1.0 } else { 0.0 };
                rows.push("continuity.g_identical", ident, 0.0, pt.g_verdict)
                    .at(at.0, at.1, at.2, at.3);
            }
        }
    }
    Ok(rows.out)
}
