//! Truncated boundary functionals `f_s(x) = E_x[W_s⁻; Q_∞(0,s)]` and
//! `g_s(y) = E_y[W_s⁻; Q⁻_∞(0,s)]`.

use crate::error::{Error, Result};
use crate::rng::ReplicaRngs;

use super::engine::{run_replicas, RunConfig};
use super::events::{fg_replica, Side};
use super::stats::{Estimate, Moments};
use super::survival::{check_samples, BarrierExperiment};

/// Default truncation horizon for `f_s`, `g_s`.
pub const DEFAULT_S: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgSide {
    pub side: Side,
    pub s_horizon: f64,
    pub x_start: f64,
}

impl FgSide {
    pub fn start(s_horizon: f64, x_start: f64) -> Self {
        FgSide {
            side: Side::Start,
            s_horizon,
            x_start,
        }
    }

    pub fn end(s_horizon: f64, x_start: f64) -> Self {
        FgSide {
            side: Side::End,
            s_horizon,
            x_start,
        }
    }
}

/// Estimates `f_s(x)` (start side) or `g_s(x)` (end side) with free Brownian
/// motion, the curve limits and the experiment's PPP and decorations. The
/// experiment's endpoints are ignored.
pub fn estimate_fg(cfg: &FgSide, exp: &BarrierExperiment, n: u64, run: &RunConfig) -> Result<Estimate> {
    check_samples(n)?;
    if !(cfg.s_horizon > 0.0) || !cfg.s_horizon.is_finite() {
        return Err(Error::domain(format!(
            "s must be positive, got {}",
            cfg.s_horizon
        )));
    }
    if !cfg.x_start.is_finite() {
        return Err(Error::domain("starting point must be finite"));
    }
    if !exp.curve.has_limits() {
        return Err(Error::config("curve.limits", "custom curve declares no limits"));
    }
    let (m, secs) = run_replicas(n, run, |i, acc: &mut Moments| {
        let mut rngs = ReplicaRngs::new(run.master_seed, i);
        acc.push(fg_replica(
            cfg.side,
            cfg.s_horizon,
            cfg.x_start,
            &exp.ppp,
            &exp.curve,
            &exp.decorations,
            &mut rngs,
        ));
    })?;
    Ok(Estimate::from_moments(&m, run.master_seed, run.workers, secs))
}

/// `f_s` or `g_s` at several truncation horizons, to monitor convergence in `s`.
pub fn fg_sensitivity(
    side: Side,
    x: f64,
    s_list: &[f64],
    exp: &BarrierExperiment,
    n: u64,
    run: &RunConfig,
) -> Result<Vec<(f64, Estimate)>> {
    s_list
        .iter()
        .map(|&s| {
            let cfg = FgSide {
                side,
                s_horizon: s,
                x_start: x,
            };
            estimate_fg(&cfg, exp, n, run).map(|e| (s, e))
        })
        .collect()
}
