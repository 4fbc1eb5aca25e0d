//! Empirical constants for the upper bounds `P(Q_t) ≤ C (x⁻+1)(y⁻+1)/t`
//! and, for `xy ≤ 0`, the exponentially refined normalisation.

use crate::error::{Error, Result};
use crate::rng::derive_seed;

use super::engine::RunConfig;
use super::stats::{log_log_slope, Estimate, Slope, Verdict, CI_SIGMAS};
use super::survival::{estimate_survival, BarrierExperiment};

#[inline]
fn neg(v: f64) -> f64 {
    (-v).max(0.0)
}

#[inline]
fn pos(v: f64) -> f64 {
    v.max(0.0)
}

/// `R_ε(t) = {x, y ≤ 1/ε, (x⁻+1)(y⁻+1) ≤ t^{1−ε}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeRegion {
    pub epsilon: f64,
}

impl RangeRegion {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::config(
                "epsilon",
                format!("must lie in (0, 1), got {epsilon}"),
            ));
        }
        Ok(RangeRegion { epsilon })
    }

    pub fn contains(&self, x: f64, y: f64, t: f64) -> bool {
        let cap = 1.0 / self.epsilon;
        x <= cap && y <= cap && (neg(x) + 1.0) * (neg(y) + 1.0) <= t.powf(1.0 - self.epsilon)
    }
}

impl Default for RangeRegion {
    fn default() -> Self {
        RangeRegion { epsilon: 0.1 }
    }
}

/// `(x⁻+1)(y⁻+1)/t`.
pub fn polynomial_scale(x: f64, y: f64, t: f64) -> f64 {
    (neg(x) + 1.0) * (neg(y) + 1.0) / t
}

/// `(x⁻ + e^{−√(2λ)(1−δ)x⁺})(y⁻ + e^{−√(2λ)(1−δ)y⁺}) · e^{(y−x)²/2t} / t`.
pub fn mixed_sign_scale(x: f64, y: f64, t: f64, lambda: f64, delta: f64) -> f64 {
    let k = (2.0 * lambda).sqrt() * (1.0 - delta);
    (neg(x) + (-k * pos(x)).exp()) * (neg(y) + (-k * pos(y)).exp()) * ((y - x).powi(2) / (2.0 * t)).exp() / t
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCell {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub survival: Estimate,
    /// `p̂ / polynomial_scale`
    pub ratio: f64,
    pub ratio_se: f64,
    /// `p̂ / mixed_sign_scale` with its standard error, when `xy ≤ 0`.
    pub mixed_ratio: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub x: f64,
    pub y: f64,
    /// `false` for the polynomial ratio, `true` for the mixed-sign ratio.
    pub mixed: bool,
    pub slope: Option<Slope>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundScan {
    pub cells: Vec<BoundCell>,
    /// Largest `ratio + 3·se` over all cells.
    pub c_hat: f64,
    /// Same for the mixed-sign ratio over cells with `xy ≤ 0`.
    pub c_prime_hat: Option<f64>,
    /// Log-log trend of the ratio in `t` for each `(x, y)` pair.
    pub trends: Vec<TrendRow>,
}

impl BoundScan {
    pub fn verdict(&self) -> Verdict {
        self.trends
            .iter()
            .fold(Verdict::NotApplicable, |v, r| v.and(r.verdict))
    }
}

fn trend(cells: &[&BoundCell], mixed: bool) -> (Option<Slope>, Verdict) {
    let ts: Vec<f64> = cells.iter().map(|c| c.t).collect();
    let (vals, ses): (Vec<f64>, Vec<f64>) = if mixed {
        cells.iter().filter_map(|c| c.mixed_ratio).unzip()
    } else {
        cells.iter().map(|c| (c.ratio, c.ratio_se)).unzip()
    };
    match log_log_slope(&ts, &vals, &ses) {
        Some(s) => (Some(s), Verdict::from_bool(s.non_increasing())),
        None => (None, Verdict::Inconclusive),
    }
}

/// Scans every `(x, y, t)` cell of the lattice. Each cell uses its own derived seed.
pub fn scan_bound_constant(
    template: &BarrierExperiment,
    region: &RangeRegion,
    xs: &[f64],
    ys: &[f64],
    ts: &[f64],
    n: u64,
    run: &RunConfig,
) -> Result<BoundScan> {
    for &x in xs {
        for &y in ys {
            for &t in ts {
                if !region.contains(x, y, t) {
                    return Err(Error::domain(format!(
                        "cell (x={x}, y={y}, t={t}) outside R_eps for eps = {}",
                        region.epsilon
                    )));
                }
            }
        }
    }
    let lambda = template.ppp.rate();
    let delta = template.curve.delta();
    let mut cells = Vec::new();
    let mut idx = 0u64;
    for &x in xs {
        for &y in ys {
            for &t in ts {
                let exp = template.with_endpoints(x, y, t)?;
                let p = estimate_survival(&exp, n, &run.with_seed(derive_seed(run.master_seed, idx)))?;
                idx += 1;
                let scale = polynomial_scale(x, y, t);
                let mixed_ratio = (x * y <= 0.0).then(|| {
                    let m = mixed_sign_scale(x, y, t, lambda, delta);
                    (p.value / m, p.std_error / m)
                });
                cells.push(BoundCell {
                    x,
                    y,
                    t,
                    survival: p,
                    ratio: p.value / scale,
                    ratio_se: p.std_error / scale,
                    mixed_ratio,
                });
            }
        }
    }
    let c_hat = cells
        .iter()
        .map(|c| c.ratio + CI_SIGMAS * c.ratio_se)
        .fold(f64::NEG_INFINITY, f64::max);
    let c_prime_hat = cells
        .iter()
        .filter_map(|c| c.mixed_ratio.map(|(r, se)| r + CI_SIGMAS * se))
        .reduce(f64::max);

    let mut trends = Vec::new();
    if ts.len() >= 2 {
        for &x in xs {
            for &y in ys {
                let group: Vec<&BoundCell> = cells.iter().filter(|c| c.x == x && c.y == y).collect();
                let (slope, verdict) = trend(&group, false);
                trends.push(TrendRow {
                    x,
                    y,
                    mixed: false,
                    slope,
                    verdict,
                });
                if x * y <= 0.0 {
                    let (slope, verdict) = trend(&group, true);
                    trends.push(TrendRow {
                        x,
                        y,
                        mixed: true,
                        slope,
                        verdict,
                    });
                }
            }
        }
    }
    Ok(BoundScan {
        cells,
        c_hat,
        c_prime_hat,
        trends,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::CurveSpec;
    use crate::decorations::DecorationFamily;
    use crate::oracles::BridgeEndpoints;
    use crate::sampling::PppConfig;

    #[test]
    fn region_membership() {
        let r = RangeRegion::default();
        assert!(r.contains(-1.0, -1.0, 16.0));
        assert!(!r.contains(-1.0, -1.0, 4.0));
        assert!(!r.contains(11.0, 0.0, 1e6));
        assert!(r.contains(4.0, -1.0, 16.0));
        assert!(RangeRegion::new(0.0).is_err());
    }

    #[test]
    fn scales() {
        assert_eq!(polynomial_scale(-1.0, -1.0, 16.0), 0.25);
        assert_eq!(polynomial_scale(3.0, 0.0, 2.0), 0.5);
        // x⁺ = 0 and y⁺ = 0: (x⁻ + 1)(y⁻ + 1) e^{(y−x)²/2t}/t
        let m = mixed_sign_scale(0.0, -1.0, 8.0, 1.0, 0.25);
        assert!((m - 2.0 * (1.0f64 / 16.0).exp() / 8.0).abs() < 1e-15);
    }

    #[test]
    fn single_cell_scan() {
        let template = BarrierExperiment::new(
            BridgeEndpoints::new(0.0, 0.0, 64.0).unwrap(),
            PppConfig::new(1.0).unwrap(),
            CurveSpec::constant(0.25, 0.0).unwrap(),
            DecorationFamily::zero(0.25),
        );
        let scan = scan_bound_constant(
            &template,
            &RangeRegion::default(),
            &[0.0],
            &[0.0],
            &[64.0],
            5000,
            &RunConfig::new(1, 2),
        )
        .unwrap();
        assert_eq!(scan.cells.len(), 1);
        assert!(scan.c_hat.is_finite() && scan.c_hat > 0.0);
        assert!(scan.c_prime_hat.is_some());
        assert!(scan.trends.is_empty());
        assert_eq!(scan.verdict(), Verdict::NotApplicable);
    }

    #[test]
    fn cells_outside_region_rejected() {
        let template = BarrierExperiment::new(
            BridgeEndpoints::new(0.0, 0.0, 64.0).unwrap(),
            PppConfig::new(1.0).unwrap(),
            CurveSpec::constant(0.25, 0.0).unwrap(),
            DecorationFamily::zero(0.25),
        );
        let r = scan_bound_constant(
            &template,
            &RangeRegion::default(),
            &[-30.0],
            &[-30.0],
            &[16.0],
            1000,
            &RunConfig::new(1, 1),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
