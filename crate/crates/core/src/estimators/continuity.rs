//! Convergence of `f_s^{(r)}`, `g_s^{(r)}` along a sequence of decoration
//! laws and curves.
//!
//! All members are evaluated on the same replica streams (common random
//! numbers), so gaps to the limit are paired differences with small variance.

use crate::barrier::CurveSpec;
use crate::decorations::DecorationFamily;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, ReplicaRngs};
use crate::sampling::PppConfig;

use super::engine::{run_replicas, RunConfig};
use super::events::{fg_replica, Side};
use super::stats::{Estimate, Moments, MomentsVec, Tally, Verdict, CI_SIGMAS};
use super::survival::check_samples;

/// One element of the sequence (or its limit).
#[derive(Debug, Clone)]
pub struct ContinuityMember {
    pub decorations: DecorationFamily,
    pub curve: CurveSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityRow {
    pub x: f64,
    pub r: usize,
    pub f: Estimate,
    pub g: Estimate,
    /// `f̂^{(r)} − f̂` with its paired standard error.
    pub f_gap: (f64, f64),
    pub g_gap: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityPoint {
    pub x: f64,
    pub f_limit: Estimate,
    pub g_limit: Estimate,
    pub rows: Vec<ContinuityRow>,
    /// Every replica produced bit-identical `g` values for all members.
    pub g_identical: bool,
    pub f_verdict: Verdict,
    pub g_verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub s: f64,
    /// End-side data (`Y_∞` law and `γ_{∞,−u}`) coincide for all members.
    pub end_side_fixed: bool,
    pub points: Vec<ContinuityPoint>,
}

impl ContinuityReport {
    pub fn verdict(&self) -> Verdict {
        self.points
            .iter()
            .fold(Verdict::NotApplicable, |v, p| v.and(p.f_verdict).and(p.g_verdict))
    }
}

#[derive(Debug, Clone, Default)]
struct ContinuityTally {
    values: MomentsVec,
    g_mismatch: u64,
}

impl Tally for ContinuityTally {
    fn merge(&mut self, other: Self) {
        self.values.merge(other.values);
        self.g_mismatch += other.g_mismatch;
    }
}

/// Points where the end-side curve limits are compared.
const LIMIT_PROBES: [f64; 8] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0];

fn check_common_delta(members: &[ContinuityMember], limit: &ContinuityMember) -> Result<()> {
    let curve_delta = limit.curve.delta();
    let tail_delta = limit.decorations.tail_delta();
    for (r, m) in members.iter().enumerate() {
        if m.curve.delta() != curve_delta {
            return Err(Error::config(
                "curve.delta",
                format!(
                    "member {r} has delta {} but the limit has {curve_delta}",
                    m.curve.delta()
                ),
            ));
        }
        if m.decorations.tail_delta() != tail_delta {
            return Err(Error::config(
                "decorations.tail_delta",
                format!(
                    "member {r} has delta {} but the limit has {tail_delta}",
                    m.decorations.tail_delta()
                ),
            ));
        }
        if !m.curve.has_limits() {
            return Err(Error::config(
                "curve.limits",
                format!("member {r} declares no limits"),
            ));
        }
    }
    if !limit.curve.has_limits() {
        return Err(Error::config("curve.limits", "limit curve declares no limits"));
    }
    Ok(())
}

fn end_side_fixed(members: &[ContinuityMember], limit: &ContinuityMember) -> bool {
    let law = limit.decorations.limit_family();
    members.iter().all(|m| {
        m.decorations.limit_family() == law
            && LIMIT_PROBES
                .iter()
                .all(|&u| m.curve.limit_minus(u).to_bits() == limit.curve.limit_minus(u).to_bits())
    })
}

fn gap_verdict(gaps: &[(f64, f64)], tol: f64, require_decrease: bool) -> Verdict {
    let Some(&(last, last_se)) = gaps.last() else {
        return Verdict::NotApplicable;
    };
    let decreasing = gaps.windows(2).all(|w| w[1].0.abs() <= w[0].0.abs());
    Verdict::from_bool((decreasing || !require_decrease) && last.abs() < tol + CI_SIGMAS * last_se)
}

/// Estimates `f_s^{(r)}(x)`, `g_s^{(r)}(x)` for every member and the limit at
/// each `x`. The `f` gaps must be non-increasing in `r` with the final gap
/// below `tol + 3·se`; with fixed end-side data the `g` values must coincide
/// bit for bit, otherwise only the final `g` gap is tested.
pub fn continuity_experiment(
    members: &[ContinuityMember],
    limit: &ContinuityMember,
    ppp: &PppConfig,
    xs: &[f64],
    s: f64,
    n: u64,
    run: &RunConfig,
    tol: f64,
) -> Result<ContinuityReport> {
    check_samples(n)?;
    if members.is_empty() {
        return Err(Error::config(
            "continuity.levels",
            "need at least one family member",
        ));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("s must be positive, got {s}")));
    }
    check_common_delta(members, limit)?;
    let fixed = end_side_fixed(members, limit);
    let k = members.len();

    let mut points = Vec::with_capacity(xs.len());
    for (xi, &x) in xs.iter().enumerate() {
        let seed_f = derive_seed(run.master_seed, 2 * xi as u64);
        let seed_g = derive_seed(run.master_seed, 2 * xi as u64 + 1);
        // layout: f_0..f_{k-1}, f_lim, g_0..g_{k-1}, g_lim, f gaps, g gaps
        let (tally, secs) = run_replicas(n, run, |i, acc: &mut ContinuityTally| {
            let mut out = vec![0.0; 4 * k + 2];
            let eval = |side: Side, seed: u64, m: &ContinuityMember| {
                let mut rngs = ReplicaRngs::new(seed, i);
                fg_replica(side, s, x, ppp, &m.curve, &m.decorations, &mut rngs)
            };
            let f_lim = eval(Side::Start, seed_f, limit);
            let g_lim = eval(Side::End, seed_g, limit);
            out[k] = f_lim;
            out[2 * k + 1] = g_lim;
            for (r, m) in members.iter().enumerate() {
                let f = eval(Side::Start, seed_f, m);
                let g = eval(Side::End, seed_g, m);
                out[r] = f;
                out[k + 1 + r] = g;
                out[2 * k + 2 + r] = f - f_lim;
                out[3 * k + 2 + r] = g - g_lim;
                if g.to_bits() != g_lim.to_bits() {
                    acc.g_mismatch += 1;
                }
            }
            acc.values.push_all(&out);
        })?;
        let m = &tally.values.0;
        let est = |mo: &Moments, seed: u64| Estimate::from_moments(mo, seed, run.workers, secs);
        let rows: Vec<ContinuityRow> = (0..k)
            .map(|r| ContinuityRow {
                x,
                r,
                f: est(&m[r], seed_f),
                g: est(&m[k + 1 + r], seed_g),
                f_gap: (m[2 * k + 2 + r].mean(), m[2 * k + 2 + r].std_error()),
                g_gap: (m[3 * k + 2 + r].mean(), m[3 * k + 2 + r].std_error()),
            })
            .collect();
        let f_gaps: Vec<(f64, f64)> = rows.iter().map(|r| r.f_gap).collect();
        let g_gaps: Vec<(f64, f64)> = rows.iter().map(|r| r.g_gap).collect();
        let g_identical = tally.g_mismatch == 0;
        let g_verdict = if fixed {
            Verdict::from_bool(g_identical)
        } else {
            gap_verdict(&g_gaps, tol, false)
        };
        points.push(ContinuityPoint {
            x,
            f_limit: est(&m[k], seed_f),
            g_limit: est(&m[2 * k + 1], seed_g),
            f_verdict: gap_verdict(&f_gaps, tol, true),
            g_verdict,
            g_identical,
            rows,
        });
    }
    Ok(ContinuityReport {
        s,
        end_side_fixed: fixed,
        points,
    })
}

/// `Y^{(r)}_u = Y_u + 2^{−r} · shift · e^{−decay·u}` over `r = 0..levels`,
/// with a base law `Y_∞ = B` shared by all members; the limit has no shift.
pub fn shifted_family(
    base: crate::decorations::BaseLaw,
    tail_delta: f64,
    shift: f64,
    decay_rate: f64,
    levels: usize,
    curve: &CurveSpec,
) -> Result<(Vec<ContinuityMember>, ContinuityMember)> {
    use crate::decorations::DecorationKind;
    let member = |scale: f64| -> Result<ContinuityMember> {
        Ok(ContinuityMember {
            decorations: DecorationFamily::new(
                tail_delta,
                DecorationKind::LimitShifted {
                    base: base.clone(),
                    drift_scale: scale,
                    decay_rate,
                },
            )?,
            curve: curve.clone(),
        })
    };
    let members = (0..levels)
        .map(|r| member(shift * 0.5f64.powi(r as i32)))
        .collect::<Result<Vec<_>>>()?;
    Ok((members, member(0.0)?))
}
