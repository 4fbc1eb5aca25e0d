//! Exact samplers for Poisson arrivals, Brownian bridges and free Brownian motion.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Homogeneous Poisson point process on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PppConfig {
    rate_lambda: f64,
}

impl PppConfig {
    pub fn new(rate_lambda: f64) -> Result<Self> {
        if !(rate_lambda > 0.0 && rate_lambda.is_finite()) {
            return Err(Error::config(
                "ppp.rate_lambda",
                format!("rate must be positive and finite, got {rate_lambda}"),
            ));
        }
        Ok(PppConfig { rate_lambda })
    }

    pub fn rate(&self) -> f64 {
        self.rate_lambda
    }

    /// Next arrival strictly after `from`, drawing one exponential gap.
    #[inline]
    pub fn next_arrival<R: Rng + ?Sized>(&self, from: f64, rng: &mut R) -> f64 {
        from + rng::exp1(rng) / self.rate_lambda
    }
}

/// Sorted arrival times of a Poisson process restricted to `(0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTimes {
    horizon: f64,
    times: Vec<f64>,
}

impl ArrivalTimes {
    pub fn new(horizon: f64, times: Vec<f64>) -> Result<Self> {
        if !(horizon >= 0.0) {
            return Err(Error::domain(format!("negative horizon {horizon}")));
        }
        if times.iter().any(|&s| !(s > 0.0 && s < horizon)) {
            return Err(Error::domain("arrival outside (0, horizon)"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("arrival times not strictly increasing"));
        }
        Ok(ArrivalTimes { horizon, times })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Which Gaussian process a [`PathSample`] was drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathKind {
    Bridge { x0: f64, y_t: f64, t: f64 },
    Free { x0: f64 },
}

/// Gaussian path values on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: PathKind,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Lazily generated arrivals in `(0, horizon)`, one exponential gap per step.
///
/// The first gap landing at or beyond the horizon is drawn and ends the
/// iteration. A zero-length gap (probability 2⁻⁵³ or so) is skipped to keep
/// the times strictly increasing.
pub struct ArrivalIter<'r, R: ?Sized> {
    cfg: PppConfig,
    horizon: f64,
    last: f64,
    done: bool,
    rng: &'r mut R,
}

impl<'r, R: Rng + ?Sized> ArrivalIter<'r, R> {
    pub fn new(cfg: &PppConfig, horizon: f64, rng: &'r mut R) -> Self {
        ArrivalIter {
            cfg: *cfg,
            horizon,
            last: 0.0,
            done: false,
            rng,
        }
    }
}

impl<R: Rng + ?Sized> Iterator for ArrivalIter<'_, R> {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        while !self.done {
            let s = self.cfg.next_arrival(self.last, self.rng);
            if !(s < self.horizon) {
                self.done = true;
                break;
            }
            let fresh = s > self.last;
            self.last = s;
            if fresh {
                return Some(s);
            }
        }
        None
    }
}

/// Samples Poisson arrivals in `(0, horizon_t)` by accumulating exponential gaps.
pub fn sample_ppp<R: Rng + ?Sized>(cfg: &PppConfig, horizon_t: f64, rng: &mut R) -> Result<ArrivalTimes> {
    if !(horizon_t >= 0.0) || !horizon_t.is_finite() {
        return Err(Error::domain(format!(
            "horizon must be non-negative, got {horizon_t}"
        )));
    }
    let times = ArrivalIter::new(cfg, horizon_t, rng).collect();
    Ok(ArrivalTimes {
        horizon: horizon_t,
        times,
    })
}

/// One step of sequential bridge sampling.
///
/// Given the bridge value `w` at `s_prev`, returns its value at `s_next` for
/// a bridge pinned to `y_t` at `t`, using the standard normal `z`.
#[inline]
pub fn bridge_step(w: f64, s_prev: f64, s_next: f64, y_t: f64, t: f64, z: f64) -> f64 {
    let remaining = t - s_prev;
    let dt = s_next - s_prev;
    let mean = w + (y_t - w) * dt / remaining;
    let var = dt * (t - s_next) / remaining;
    mean + var.max(0.0).sqrt() * z
}

/// Exact Brownian bridge from `x0` at time 0 to `y_t` at `horizon_t`, observed at `times`.
pub fn sample_bridge<R: Rng + ?Sized>(
    x0: f64,
    y_t: f64,
    horizon_t: f64,
    times: &[f64],
    rng: &mut R,
) -> Result<PathSample> {
    let kind = PathKind::Bridge {
        x0,
        y_t,
        t: horizon_t,
    };
    if horizon_t == 0.0 {
        if x0 != y_t {
            return Err(Error::domain("zero-length bridge with distinct endpoints"));
        }
        if !times.is_empty() {
            return Err(Error::domain("zero-length bridge cannot be observed"));
        }
        return Ok(PathSample {
            times: Vec::new(),
            values: Vec::new(),
            kind,
        });
    }
    if !(horizon_t > 0.0) || !horizon_t.is_finite() {
        return Err(Error::domain(format!(
            "bridge horizon must be positive, got {horizon_t}"
        )));
    }
    if times.iter().any(|&s| !(s > 0.0 && s < horizon_t)) {
        return Err(Error::domain("bridge observation time outside (0, t)"));
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("bridge observation times not sorted"));
    }
    let mut values = Vec::with_capacity(times.len());
    let (mut s, mut w) = (0.0, x0);
    for &next in times {
        w = bridge_step(w, s, next, y_t, horizon_t, rng::normal(rng));
        s = next;
        values.push(w);
    }
    Ok(PathSample {
        times: times.to_vec(),
        values,
        kind,
    })
}

/// Brownian motion started at `x0` at time 0, observed at `times`.
pub fn sample_bm<R: Rng + ?Sized>(x0: f64, times: &[f64], rng: &mut R) -> Result<PathSample> {
    if times.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
        return Err(Error::domain("observation times must be non-negative"));
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("observation times not sorted"));
    }
    let mut values = Vec::with_capacity(times.len());
    let (mut s, mut w) = (0.0, x0);
    for &next in times {
        w += (next - s).sqrt() * rng::normal(rng);
        s = next;
        values.push(w);
    }
    Ok(PathSample {
        times: times.to_vec(),
        values,
        kind: PathKind::Free { x0 },
    })
}
