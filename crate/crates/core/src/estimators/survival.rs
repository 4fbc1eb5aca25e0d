use crate::barrier::{uniform_grid, validate_envelope, CurveSpec, DEFAULT_ENVELOPE_POINTS};
use crate::decorations::DecorationFamily;
use crate::error::{Error, Result};
use crate::oracles::BridgeEndpoints;
use crate::rng::ReplicaRngs;
use crate::sampling::PppConfig;

use super::engine::{run_replicas, RunConfig};
use super::events::bridge_replica;
use super::stats::{Estimate, Moments};

/// Smallest replica count accepted by the estimators.
pub const MIN_SAMPLES: u64 = 1000;

/// Everything that defines one barrier-survival problem.
#[derive(Debug, Clone)]
pub struct BarrierExperiment {
    pub endpoints: BridgeEndpoints,
    pub ppp: PppConfig,
    pub curve: CurveSpec,
    pub decorations: DecorationFamily,
}

impl BarrierExperiment {
    pub fn new(
        endpoints: BridgeEndpoints,
        ppp: PppConfig,
        curve: CurveSpec,
        decorations: DecorationFamily,
    ) -> Self {
        BarrierExperiment {
            endpoints,
            ppp,
            curve,
            decorations,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.endpoints.t
    }

    /// Same experiment with other endpoints and horizon.
    pub fn with_endpoints(&self, x0: f64, y_t: f64, t: f64) -> Result<Self> {
        Ok(BarrierExperiment {
            endpoints: BridgeEndpoints::new(x0, y_t, t)?,
            ..self.clone()
        })
    }

    /// Fails with a configuration error when the curve leaves the envelope
    /// on the default grid.
    pub fn check_envelope(&self) -> Result<()> {
        let t = self.horizon();
        let report = validate_envelope(&self.curve, t, &uniform_grid(t, DEFAULT_ENVELOPE_POINTS))?;
        match report.first_violation {
            None => Ok(()),
            Some((u, g)) => Err(Error::config(
                "curve",
                format!(
                    "curve value {g} at u = {u} leaves the envelope for delta = {} on t = {t}",
                    self.curve.delta()
                ),
            )),
        }
    }
}

pub(crate) fn check_samples(n: u64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    Ok(())
}

/// Probability that the decorated bridge stays below the curve at every arrival in `[0, t]`.
pub fn estimate_survival(exp: &BarrierExperiment, n: u64, run: &RunConfig) -> Result<Estimate> {
    check_samples(n)?;
    exp.check_envelope()?;
    let (m, secs) = run_replicas(n, run, |i, acc: &mut Moments| {
        let mut rngs = ReplicaRngs::new(run.master_seed, i);
        let alive = bridge_replica(
            &exp.endpoints,
            &exp.ppp,
            &exp.curve,
            &exp.decorations,
            &mut rngs,
            None,
        );
        acc.push(if alive { 1.0 } else { 0.0 });
    })?;
    Ok(Estimate::from_moments(&m, run.master_seed, run.workers, secs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decorations::DecorationKind;
    use crate::oracles::ballot_survival;

    fn zero_exp(x: f64, y: f64, t: f64, lambda: f64) -> BarrierExperiment {
        BarrierExperiment::new(
            BridgeEndpoints::new(x, y, t).unwrap(),
            PppConfig::new(lambda).unwrap(),
            CurveSpec::constant(0.25, 0.0).unwrap(),
            DecorationFamily::zero(0.25),
        )
    }

    #[test]
    fn unreachable_barrier_always_survives() {
        let mut exp = zero_exp(0.0, 0.0, 3.0, 2.0);
        exp.curve = CurveSpec::constant(1e-10, 1e9).unwrap();
        let e = estimate_survival(&exp, 2000, &RunConfig::new(1, 2)).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn envelope_violation_is_config_error() {
        let mut exp = zero_exp(0.0, 0.0, 3.0, 2.0);
        exp.curve = CurveSpec::constant(0.25, -10.0).unwrap();
        let err = estimate_survival(&exp, 2000, &RunConfig::new(1, 1)).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn too_few_samples_rejected() {
        let exp = zero_exp(-1.0, -1.0, 2.0, 5.0);
        assert!(estimate_survival(&exp, 10, &RunConfig::new(1, 1)).is_err());
    }

    #[test]
    fn deterministic_in_seed_and_independent_of_workers() {
        let exp = zero_exp(-1.0, -1.0, 2.0, 5.0);
        let a = estimate_survival(&exp, 20_000, &RunConfig::new(3, 1)).unwrap();
        let b = estimate_survival(&exp, 20_000, &RunConfig::new(3, 4)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let c = estimate_survival(&exp, 20_000, &RunConfig::new(4, 4)).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn dense_observation_stays_above_ballot() {
        let exp = zero_exp(-1.0, -1.0, 2.0, 20.0);
        let e = estimate_survival(&exp, 100_000, &RunConfig::new(5, 4)).unwrap();
        let ballot = ballot_survival(&exp.endpoints);
        assert!(e.value > ballot + 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn decorations_enter_the_event() {
        // a huge positive decoration at every arrival lifts the barrier
        let mut exp = zero_exp(5.0, 5.0, 2.0, 3.0);
        exp.decorations = DecorationFamily::new(
            0.5,
            DecorationKind::Table {
                pieces: vec![crate::decorations::TablePiece {
                    from: 0.0,
                    values: vec![1e6],
                }],
            },
        )
        .unwrap();
        exp.curve = CurveSpec::constant(0.25, 0.0).unwrap();
        let e = estimate_survival(&exp, 1000, &RunConfig::new(1, 1)).unwrap();
        assert_eq!(e.value, 1.0);
    }
}
