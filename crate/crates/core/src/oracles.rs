//! Closed-form probabilities for Brownian bridges and motions below straight barriers.
//!
//! Everything here uses the below-barrier convention: a path "survives" when
//! it stays at or under the barrier. Exponents below [`EXP_UNDERFLOW`] are
//! clamped to probability zero.

use crate::error::{Error, Result};

/// Smallest exponent kept; `exp(x)` for `x < EXP_UNDERFLOW` is reported as 0.
pub const EXP_UNDERFLOW: f64 = -745.0;

#[inline]
pub(crate) fn clamped_exp(x: f64) -> f64 {
    if x < EXP_UNDERFLOW {
        0.0
    } else {
        x.exp()
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[inline]
fn neg_part(v: f64) -> f64 {
    (-v).max(0.0)
}

/// Endpoints of a Brownian bridge on `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeEndpoints {
    pub x0: f64,
    pub y_t: f64,
    pub t: f64,
}

impl BridgeEndpoints {
    pub fn new(x0: f64, y_t: f64, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("bridge length must be positive, got {t}")));
        }
        if !x0.is_finite() || !y_t.is_finite() {
            return Err(Error::domain("bridge endpoints must be finite"));
        }
        Ok(BridgeEndpoints { x0, y_t, t })
    }
}

/// `P(max over [0,t] of the bridge ≤ 0)`.
pub fn ballot_survival(e: &BridgeEndpoints) -> f64 {
    if e.x0 > 0.0 || e.y_t > 0.0 {
        return 0.0;
    }
    let exponent = -2.0 * neg_part(e.x0) * neg_part(e.y_t) / e.t;
    // 1 - e^{x} without cancellation for small |x|
    -exponent.exp_m1()
}

/// `P(sup over [0,s] of a 0→0 bridge ≥ z) = exp(−2z²/s)`.
pub fn bridge_max_tail(z: f64, s: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::domain(format!("level must be non-negative, got {z}")));
    }
    if !(s > 0.0) {
        return Err(Error::domain(format!("bridge length must be positive, got {s}")));
    }
    Ok(clamped_exp(-2.0 * z * z / s))
}

/// Probability that a Brownian bridge of length `h` from `w0` to `w1` touches
/// the straight barrier joining `b0` to `b1`.
///
/// Returns 1 when either endpoint is at or above the barrier. A non-positive
/// `h` carries no excursion, so the answer is then 0 for endpoints strictly
/// below.
#[inline]
pub fn segment_crossing_prob(w0: f64, w1: f64, b0: f64, b1: f64, h: f64) -> f64 {
    if w0 >= b0 || w1 >= b1 {
        return 1.0;
    }
    if !(h > 0.0) {
        return 0.0;
    }
    clamped_exp(-2.0 * (b0 - w0) * (b1 - w1) / h)
}

/// Mean and variance of the bridge at time `r ∈ (0, t)`.
pub fn bridge_marginal(e: &BridgeEndpoints, r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < e.t) {
        return Err(Error::domain(format!("time {r} outside (0, {})", e.t)));
    }
    let mean = (e.x0 * (e.t - r) + e.y_t * r) / e.t;
    let variance = r * (e.t - r) / e.t;
    Ok((mean, variance))
}

/// `P(max over [0,t] of a Brownian motion from x ≤ 0)`.
pub fn bm_survival(x: f64, t: f64) -> f64 {
    if x > 0.0 {
        return 0.0;
    }
    if t <= 0.0 {
        return 1.0;
    }
    libm::erf(neg_part(x) / (2.0 * t).sqrt())
}
