//! Barrier events at Poisson arrivals and the per-replica streaming kernels.
//!
//! The kernels draw arrivals, path values and decorations from three separate
//! lanes in the same order as the composed pipeline
//! `sample_ppp → sample_bridge/sample_bm → sample_decorations`, so for a given
//! replica they see exactly the same values and may stop at the first
//! violation without changing any other replica.

use crate::barrier::CurveSpec;
use crate::decorations::{DecorationFamily, DecorationLabel};
use crate::error::{Error, Result};
use crate::oracles::BridgeEndpoints;
use crate::rng::{self, ReplicaRngs};
use crate::sampling::{bridge_step, ArrivalIter, PathKind, PathSample, PppConfig};

/// The barrier seen at an arrival `σ`.
#[derive(Debug, Clone, Copy)]
pub enum Ceiling<'a> {
    /// `γ_{t,σ}` on a finite horizon.
    Finite { curve: &'a CurveSpec, t: f64 },
    /// `γ_{∞,σ}`, seen from the start of a long bridge.
    LimitStart(&'a CurveSpec),
    /// `γ_{∞,−σ}`, seen from the end of a long bridge.
    LimitEnd(&'a CurveSpec),
}

impl Ceiling<'_> {
    #[inline]
    pub fn at(&self, u: f64) -> f64 {
        match *self {
            Ceiling::Finite { curve, t } => curve.value_at(t, u),
            Ceiling::LimitStart(curve) => curve.limit_plus(u),
            Ceiling::LimitEnd(curve) => curve.limit_minus(u),
        }
    }

    /// Ceiling for a path; bridges use their own horizon.
    pub fn for_path<'a>(curve: &'a CurveSpec, path: &PathSample) -> Ceiling<'a> {
        match path.kind {
            PathKind::Bridge { t, .. } => Ceiling::Finite { curve, t },
            PathKind::Free { .. } => Ceiling::LimitStart(curve),
        }
    }
}

/// Survival test at one arrival; equality counts as survival.
#[inline]
pub fn below(w: f64, ceiling: f64, decoration: f64) -> bool {
    w - ceiling - decoration <= 0.0
}

/// `true` iff every arrival in `[u1, u2]` satisfies `W ≤ γ + Y`.
pub fn indicator_q(
    path: &PathSample,
    ceiling: &Ceiling<'_>,
    decorations: &[f64],
    window: (f64, f64),
) -> Result<bool> {
    if path.values.len() != path.times.len() || decorations.len() != path.times.len() {
        return Err(Error::domain(format!(
            "misaligned inputs: {} times, {} values, {} decorations",
            path.times.len(),
            path.values.len(),
            decorations.len()
        )));
    }
    let (u1, u2) = window;
    if !(u1 <= u2) {
        return Err(Error::domain(format!("empty window [{u1}, {u2}]")));
    }
    Ok(path
        .times
        .iter()
        .zip(&path.values)
        .zip(decorations)
        .filter(|((&s, _), _)| s >= u1 && s <= u2)
        .all(|((&s, &w), &y)| below(w, ceiling.at(s), y)))
}

/// One bridge replica over `[0, t]`. Returns survival of `Q_t(0, t)`.
///
/// When `trace` is given, every visited arrival `(σ, W_σ)` is appended (the
/// trace is complete exactly when the replica survives).
#[inline]
pub fn bridge_replica(
    ends: &BridgeEndpoints,
    ppp: &PppConfig,
    curve: &CurveSpec,
    deco: &DecorationFamily,
    rngs: &mut ReplicaRngs,
    mut trace: Option<&mut Vec<(f64, f64)>>,
) -> bool {
    let t = ends.t;
    let (mut s, mut w) = (0.0, ends.x0);
    for next in ArrivalIter::new(ppp, t, &mut rngs.arrivals) {
        w = bridge_step(w, s, next, ends.y_t, t, rng::normal(&mut rngs.path));
        s = next;
        let y = deco.sample_at(s, &mut rngs.decorations);
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((s, w));
        }
        if !below(w, curve.value_at(t, s), y) {
            return false;
        }
    }
    true
}

/// Which end of a long bridge a truncated functional describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `f_s`: limits `γ_{∞,u}` and decorations `Y_u`.
    Start,
    /// `g_s`: limits `γ_{∞,−u}` and i.i.d. copies of `Y_∞`.
    End,
}

/// One free-motion replica from `x` over `[0, s]`: returns `W_s⁻ · 1{survival}`.
#[inline]
pub fn fg_replica(
    side: Side,
    s_horizon: f64,
    x: f64,
    ppp: &PppConfig,
    curve: &CurveSpec,
    deco: &DecorationFamily,
    rngs: &mut ReplicaRngs,
) -> f64 {
    let (mut s, mut w) = (0.0, x);
    for next in ArrivalIter::new(ppp, s_horizon, &mut rngs.arrivals) {
        w += (next - s).sqrt() * rng::normal(&mut rngs.path);
        s = next;
        let (ceiling, y) = match side {
            Side::Start => (curve.limit_plus(s), deco.sample_at(s, &mut rngs.decorations)),
            Side::End => (
                curve.limit_minus(s),
                deco.sample(DecorationLabel::Infinity, &mut rngs.decorations),
            ),
        };
        if !below(w, ceiling, y) {
            return 0.0;
        }
    }
    w += (s_horizon - s).sqrt() * rng::normal(&mut rngs.path);
    (-w).max(0.0)
}
