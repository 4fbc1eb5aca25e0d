//! Pathwise comparison of survival from ordered endpoints.
//!
//! One bridge from `(x, y)` is sampled; the bridge from `(x′, y′)` is the same
//! path shifted by `(x′−x)(1−σ/t) + (y′−y)σ/t`, which is again a bridge with
//! the right endpoints. Arrivals and decorations are shared.

use crate::error::{Error, Result};
use crate::rng::{self, ReplicaRngs};
use crate::sampling::{bridge_step, ArrivalIter};

use super::engine::{run_replicas, RunConfig};
use super::events::below;
use super::stats::{Estimate, Moments, Tally, Verdict, CI_SIGMAS};
use super::survival::{check_samples, BarrierExperiment};

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub low: (f64, f64),
    pub high: (f64, f64),
    pub survival_low: Estimate,
    pub survival_high: Estimate,
    /// Replicas surviving from the higher endpoints but not from the lower ones.
    pub violations: u64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, Default)]
struct PairTally {
    low: Moments,
    high: Moments,
    violations: u64,
}

impl Tally for PairTally {
    fn merge(&mut self, other: Self) {
        self.low.merge(other.low);
        self.high.merge(other.high);
        self.violations += other.violations;
    }
}

/// Paired survival indicators `(low, high)` of one coupled replica.
fn coupled_replica(exp: &BarrierExperiment, high: (f64, f64), rngs: &mut ReplicaRngs) -> (bool, bool) {
    let e = &exp.endpoints;
    let t = e.t;
    let (dx, dy) = (high.0 - e.x0, high.1 - e.y_t);
    let (mut s, mut w) = (0.0, e.x0);
    let (mut alive_lo, mut alive_hi) = (true, true);
    for next in ArrivalIter::new(&exp.ppp, t, &mut rngs.arrivals) {
        w = bridge_step(w, s, next, e.y_t, t, rng::normal(&mut rngs.path));
        s = next;
        let y = exp.decorations.sample_at(s, &mut rngs.decorations);
        let ceiling = exp.curve.value_at(t, s);
        let w_hi = w + dx * (1.0 - s / t) + dy * (s / t);
        alive_lo &= below(w, ceiling, y);
        alive_hi &= below(w_hi, ceiling, y);
        if !alive_lo && !alive_hi {
            break;
        }
    }
    (alive_lo, alive_hi)
}

/// `exp.endpoints` give the lower pair `(x, y)`; `high` is `(x′, y′)`.
pub fn monotonicity_coupled(
    exp: &BarrierExperiment,
    high: (f64, f64),
    n: u64,
    run: &RunConfig,
) -> Result<MonotonicityReport> {
    check_samples(n)?;
    let low = (exp.endpoints.x0, exp.endpoints.y_t);
    if !(low.0 <= high.0 && low.1 <= high.1) {
        return Err(Error::domain(format!(
            "endpoints not ordered: ({}, {}) vs ({}, {})",
            low.0, low.1, high.0, high.1
        )));
    }
    exp.check_envelope()?;
    let (tally, secs) = run_replicas(n, run, |i, acc: &mut PairTally| {
        let mut rngs = ReplicaRngs::new(run.master_seed, i);
        let (lo, hi) = coupled_replica(exp, high, &mut rngs);
        acc.low.push(if lo { 1.0 } else { 0.0 });
        acc.high.push(if hi { 1.0 } else { 0.0 });
        if hi && !lo {
            acc.violations += 1;
        }
    })?;
    let survival_low = Estimate::from_moments(&tally.low, run.master_seed, run.workers, secs);
    let survival_high = Estimate::from_moments(&tally.high, run.master_seed, run.workers, secs);
    let aggregate_ok = survival_low.value
        >= survival_high.value - CI_SIGMAS * survival_high.std_error.max(survival_low.std_error);
    Ok(MonotonicityReport {
        low,
        high,
        survival_low,
        survival_high,
        violations: tally.violations,
        verdict: Verdict::from_bool(tally.violations == 0 && aggregate_ok),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::CurveSpec;
    use crate::decorations::{DecorationFamily, DecorationKind};
    use crate::oracles::BridgeEndpoints;
    use crate::sampling::PppConfig;

    fn exp(x: f64, y: f64) -> BarrierExperiment {
        BarrierExperiment::new(
            BridgeEndpoints::new(x, y, 16.0).unwrap(),
            PppConfig::new(1.0).unwrap(),
            CurveSpec::canonical_plus(0.25).unwrap(),
            DecorationFamily::new(0.25, DecorationKind::TwoSidedExponential { rate: 1.0 }).unwrap(),
        )
    }

    #[test]
    fn equal_endpoints_give_identical_indicators() {
        let r = monotonicity_coupled(&exp(-1.0, -1.0), (-1.0, -1.0), 5000, &RunConfig::new(1, 2)).unwrap();
        assert_eq!(r.survival_low, r.survival_high);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn ordered_pair_has_no_violations() {
        let r = monotonicity_coupled(&exp(-2.0, -2.0), (0.0, 0.0), 20_000, &RunConfig::new(2, 4)).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.survival_low.value > r.survival_high.value);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn unordered_pair_rejected() {
        let err = monotonicity_coupled(&exp(0.0, -2.0), (-1.0, 0.0), 1000, &RunConfig::new(1, 1));
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn low_side_matches_plain_survival() {
        let e = exp(-1.0, -1.0);
        let run = RunConfig::new(5, 3);
        let r = monotonicity_coupled(&e, (0.0, 1.0), 10_000, &run).unwrap();
        let p = super::super::survival::estimate_survival(&e, 10_000, &run).unwrap();
        assert_eq!(r.survival_low.value, p.value);
    }
}
