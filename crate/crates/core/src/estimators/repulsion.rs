//! Conditional probability that a surviving bridge comes within `M` of the
//! curve somewhere in `[s, t−s]`.
//!
//! The path is known exactly at the arrivals. Survivors are additionally
//! sampled on a uniform grid of the inner window (bridge interpolation between
//! the neighbouring known values), and the unseen excursions between
//! consecutive window points are accounted for with the straight-barrier
//! crossing probability against `γ − M`. A single uniform per replica decides
//! the crossing from the aggregated probability `1 − Π(1 − p_segment)`, which
//! has the same law as flagging every segment independently.

use crate::barrier::{regularity_triples, validate_regularity, DEFAULT_REGULARITY_LATTICE};
use crate::error::{Error, Result};
use crate::oracles::segment_crossing_prob;
use crate::rng::{self, lanes, ReplicaRngs, RngStream};
use crate::sampling::bridge_step;

use super::engine::{run_replicas, RunConfig};
use super::events::bridge_replica;
use super::stats::{Estimate, RatioMoments, Verdict, CI_SIGMAS};
use super::survival::{check_samples, BarrierExperiment};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepulsionConfig {
    /// Margin `M ≥ 1` below the curve.
    pub margin: f64,
    /// Inner window offset `s`, with `2 < s ≤ t/2`.
    pub s_inner: f64,
    /// Grid spacing in `(0, 1]` for the continuous maximum.
    pub grid_step: f64,
}

impl RepulsionConfig {
    pub fn new(margin: f64, s_inner: f64, grid_step: f64) -> Result<Self> {
        if !(margin >= 1.0) {
            return Err(Error::config(
                "repulsion.margin",
                format!("must be >= 1, got {margin}"),
            ));
        }
        if !(grid_step > 0.0 && grid_step <= 1.0) {
            return Err(Error::config(
                "repulsion.grid_step",
                format!("must lie in (0, 1], got {grid_step}"),
            ));
        }
        Ok(RepulsionConfig {
            margin,
            s_inner,
            grid_step,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepulsionEstimate {
    pub s: f64,
    /// `P(max_{[s,t−s]} W − γ ≥ −M, Q_t)`
    pub joint: Estimate,
    /// `P(Q_t)`
    pub survival: Estimate,
    pub conditional: f64,
    pub conditional_se: f64,
    /// `N/A` normally, `INCONCLUSIVE` when the survival band reaches 0.
    pub verdict: Verdict,
}

impl RepulsionEstimate {
    /// `√s · p̂_cond` and its standard error.
    pub fn scaled(&self) -> (f64, f64) {
        let r = self.s.sqrt();
        (r * self.conditional, r * self.conditional_se)
    }
}

/// Grid covering `[lo, hi]` with spacing `h`, always containing both ends.
fn window_grid(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(((hi - lo) / h) as usize + 2);
    let mut j = 0u64;
    loop {
        let u = lo + j as f64 * h;
        if u >= hi - 1e-9 * h {
            break;
        }
        g.push(u);
        j += 1;
    }
    g.push(hi);
    g
}

/// Window grid built dyadically: a base grid of spacing `h₀ ∈ (½, 1]` refined
/// by `levels` rounds of midpoint insertion. Halving the step adds one round
/// and leaves the earlier draws untouched, so two step sizes share their
/// coarse points under a common seed.
#[derive(Debug, Clone, PartialEq)]
struct NestedGrid {
    base: Vec<f64>,
    levels: u32,
}

impl NestedGrid {
    fn new(lo: f64, hi: f64, step: f64) -> Self {
        let (mut h0, mut levels) = (step, 0);
        while h0 <= 0.5 {
            h0 *= 2.0;
            levels += 1;
        }
        NestedGrid {
            base: window_grid(lo, hi, h0),
            levels,
        }
    }
}

#[derive(Debug, Default)]
struct Scratch {
    points: Vec<(f64, f64)>,
    next: Vec<(f64, f64)>,
    grid: Vec<f64>,
    next_grid: Vec<f64>,
}

/// Decides whether a surviving path touches `γ − M` inside `[s, t−s]`.
/// `scratch.points` ends up holding the window's arrivals and grid values.
fn window_hit(
    exp: &BarrierExperiment,
    rc: &RepulsionConfig,
    arrivals: &[(f64, f64)],
    grid: &NestedGrid,
    grid_rng: &mut rng::StreamRng,
    u: f64,
    scratch: &mut Scratch,
) -> bool {
    let t = exp.horizon();
    let hi = t - rc.s_inner;
    let y_end = exp.endpoints.y_t;
    let Scratch {
        points,
        next,
        grid: g,
        next_grid,
    } = scratch;
    points.clear();
    g.clear();
    g.extend_from_slice(&grid.base);

    let (mut left_u, mut left_w) = (0.0, exp.endpoints.x0);
    let mut i = 0;
    for &b in &grid.base {
        while i < arrivals.len() && arrivals[i].0 < b {
            let (a, w) = arrivals[i];
            if a >= rc.s_inner {
                points.push((a, w));
            }
            left_u = a;
            left_w = w;
            i += 1;
        }
        if i < arrivals.len() && arrivals[i].0 == b {
            continue;
        }
        let (right_u, right_w) = arrivals.get(i).copied().unwrap_or((t, y_end));
        let w = bridge_step(left_w, left_u, b, right_w, right_u, rng::normal(grid_rng));
        points.push((b, w));
        left_u = b;
        left_w = w;
    }
    while i < arrivals.len() && arrivals[i].0 <= hi {
        points.push(arrivals[i]);
        i += 1;
    }

    // midpoints of one level are separated by known points, so each is a
    // bridge value between its two current neighbours
    for _ in 0..grid.levels {
        next.clear();
        next_grid.clear();
        let mut j = 0;
        for pair in g.windows(2) {
            let mid = 0.5 * (pair[0] + pair[1]);
            while points[j].0 < mid {
                next.push(points[j]);
                j += 1;
            }
            next_grid.push(pair[0]);
            next_grid.push(mid);
            if points[j].0 == mid {
                continue;
            }
            let (ul, wl) = *next.last().expect("grid point left of a midpoint");
            let (ur, wr) = points[j];
            next.push((mid, bridge_step(wl, ul, mid, wr, ur, rng::normal(grid_rng))));
        }
        next_grid.push(*g.last().expect("non-empty grid"));
        next.extend_from_slice(&points[j..]);
        std::mem::swap(points, next);
        std::mem::swap(g, next_grid);
    }

    let barrier = |s: f64| exp.curve.value_at(t, s) - rc.margin;
    if points.iter().any(|&(s, w)| w >= barrier(s)) {
        return true;
    }
    let mut stay = 1.0;
    for pair in points.windows(2) {
        let ((s0, w0), (s1, w1)) = (pair[0], pair[1]);
        stay *= 1.0 - segment_crossing_prob(w0, w1, barrier(s0), barrier(s1), s1 - s0);
    }
    u < 1.0 - stay
}

pub fn estimate_repulsion(
    exp: &BarrierExperiment,
    rc: &RepulsionConfig,
    n: u64,
    run: &RunConfig,
) -> Result<RepulsionEstimate> {
    check_samples(n)?;
    let t = exp.horizon();
    if !(rc.s_inner > 2.0 && rc.s_inner <= t / 2.0) {
        return Err(Error::domain(format!(
            "inner offset s = {} must satisfy 2 < s <= t/2 = {}",
            rc.s_inner,
            t / 2.0
        )));
    }
    exp.check_envelope()?;
    let reg = validate_regularity(&exp.curve, t, &regularity_triples(t, DEFAULT_REGULARITY_LATTICE))?;
    if let Some((u, r, u2)) = reg.first_violation {
        return Err(Error::config(
            "curve",
            format!("regularity condition fails at (u, r, u') = ({u}, {r}, {u2})"),
        ));
    }
    let grid = NestedGrid::new(rc.s_inner, t - rc.s_inner, rc.grid_step);

    let (acc, secs) = run_replicas(n, run, |i, acc: &mut RatioMoments| {
        let mut rngs = ReplicaRngs::new(run.master_seed, i);
        let mut trace = Vec::new();
        let alive = bridge_replica(
            &exp.endpoints,
            &exp.ppp,
            &exp.curve,
            &exp.decorations,
            &mut rngs,
            Some(&mut trace),
        );
        if !alive {
            acc.push(0.0, 0.0);
            return;
        }
        let stream = RngStream::new(run.master_seed, i);
        let mut grid_rng = stream.lane(lanes::GRID).generator();
        let u = rng::uniform(&mut stream.lane(lanes::ROUNDING).generator());
        let mut scratch = Scratch::default();
        let hit = window_hit(exp, rc, &trace, &grid, &mut grid_rng, u, &mut scratch);
        acc.push(if hit { 1.0 } else { 0.0 }, 1.0);
    })?;

    let joint = Estimate::from_moments(&acc.num, run.master_seed, run.workers, secs);
    let survival = Estimate::from_moments(&acc.den, run.master_seed, run.workers, secs);
    let (conditional, conditional_se) = acc.ratio();
    let verdict = if survival.value - CI_SIGMAS * survival.std_error <= 0.0 {
        Verdict::Inconclusive
    } else {
        Verdict::NotApplicable
    };
    Ok(RepulsionEstimate {
        s: rc.s_inner,
        joint,
        survival,
        conditional,
        conditional_se,
        verdict,
    })
}
