//! Comparison of `t·P(Q_t)` with `2 f_s(x) g_s(y)` along a horizon grid.

use crate::error::{Error, Result};
use crate::rng::derive_seed;

use super::bound_scan::RangeRegion;
use super::engine::RunConfig;
use super::fg::{estimate_fg, FgSide};
use super::stats::{Estimate, Verdict, CI_SIGMAS};
use super::survival::{estimate_survival, BarrierExperiment};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOptions {
    /// Accepted relative deviation of the ratio from 1 at the largest horizon.
    pub tol: f64,
    pub epsilon: f64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions {
            tol: 0.2,
            epsilon: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticRow {
    pub t: f64,
    pub survival: Estimate,
    /// `t · p̂(t)`
    pub scaled: f64,
    pub scaled_se: f64,
    /// `t · p̂(t) / (2 f̂ ĝ)`
    pub ratio: f64,
    pub ratio_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub f: Estimate,
    pub g: Estimate,
    pub rows: Vec<AsymptoticRow>,
    pub verdict: Verdict,
}

impl AsymptoticReport {
    pub fn fg_product(&self) -> f64 {
        2.0 * self.f.value * self.g.value
    }

    pub fn fg_product_se(&self) -> f64 {
        2.0 * ((self.f.std_error * self.g.value).powi(2) + (self.g.std_error * self.f.value).powi(2)).sqrt()
    }
}

/// Seed tags; every estimate in the report reads its own seed.
const TAG_F: u64 = 1;
const TAG_G: u64 = 2;
const TAG_T: u64 = 100;

pub fn check_asymptotic(
    exp: &BarrierExperiment,
    x: f64,
    y: f64,
    t_grid: &[f64],
    s: f64,
    n: u64,
    run: &RunConfig,
    opts: &AsymptoticOptions,
) -> Result<AsymptoticReport> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("t_grid must be non-empty and increasing"));
    }
    let region = RangeRegion::new(opts.epsilon)?;
    for &t in t_grid {
        if !region.contains(x, y, t) {
            return Err(Error::config(
                "epsilon",
                format!(
                    "(x, y) = ({x}, {y}) lies outside R_eps(t) for eps = {}, t = {t}",
                    opts.epsilon
                ),
            ));
        }
    }
    let f = estimate_fg(
        &FgSide::start(s, x),
        exp,
        n,
        &run.with_seed(derive_seed(run.master_seed, TAG_F)),
    )?;
    let g = estimate_fg(
        &FgSide::end(s, y),
        exp,
        n,
        &run.with_seed(derive_seed(run.master_seed, TAG_G)),
    )?;
    let fg = 2.0 * f.value * g.value;
    let rel_fg = (f.std_error / f.value).powi(2) + (g.std_error / g.value).powi(2);

    let mut rows = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let e = exp.with_endpoints(x, y, t)?;
        let p = estimate_survival(
            &e,
            n,
            &run.with_seed(derive_seed(run.master_seed, TAG_T + i as u64)),
        )?;
        let scaled = t * p.value;
        let scaled_se = t * p.std_error;
        let ratio = scaled / fg;
        let ratio_se = ((scaled_se / fg).powi(2) + ratio * ratio * rel_fg).sqrt();
        rows.push(AsymptoticRow {
            t,
            survival: p,
            scaled,
            scaled_se,
            ratio,
            ratio_se,
        });
    }
    let last = rows.last().expect("non-empty grid");
    let verdict = if !(last.ratio_se.is_finite()) || CI_SIGMAS * last.ratio_se > opts.tol {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool((last.ratio - 1.0).abs() <= opts.tol)
    };
    Ok(AsymptoticReport {
        x,
        y,
        s,
        f,
        g,
        rows,
        verdict,
    })
}
