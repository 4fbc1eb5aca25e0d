//! Replica tallies, Monte Carlo estimates and small regression helpers.

use std::fmt;

/// Number of standard errors used for confidence bands throughout the crate.
pub const CI_SIGMAS: f64 = 3.0;

/// Anything that can be accumulated per replica and merged across blocks.
pub trait Tally: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Count, sum and sum of squares of a scalar replica output.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.sum / n;
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

impl Tally for Moments {
    fn merge(&mut self, other: Self) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }
}

/// Element-wise moments of a fixed-length vector of replica outputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentsVec(pub Vec<Moments>);

impl MomentsVec {
    pub fn push_all(&mut self, values: &[f64]) {
        if self.0.is_empty() {
            self.0 = vec![Moments::default(); values.len()];
        }
        for (m, &v) in self.0.iter_mut().zip(values) {
            m.push(v);
        }
    }
}

impl Tally for MomentsVec {
    fn merge(&mut self, other: Self) {
        if self.0.is_empty() {
            self.0 = other.0;
            return;
        }
        for (a, b) in self.0.iter_mut().zip(other.0) {
            a.merge(b);
        }
    }
}

/// Joint moments of a numerator/denominator pair, for ratio-of-means estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RatioMoments {
    pub num: Moments,
    pub den: Moments,
    pub cross: f64,
}

impl RatioMoments {
    #[inline]
    pub fn push(&mut self, num: f64, den: f64) {
        self.num.push(num);
        self.den.push(den);
        self.cross += num * den;
    }

    /// `(mean(num) / mean(den), delta-method standard error)`.
    pub fn ratio(&self) -> (f64, f64) {
        let n = self.num.n as f64;
        let (a, b) = (self.num.mean(), self.den.mean());
        if !(b > 0.0) || n < 2.0 {
            return (f64::NAN, f64::NAN);
        }
        let r = a / b;
        // Var(num − r·den) / (n · b²)
        let cov = (self.cross - n * a * b) / (n - 1.0);
        let v = self.num.variance() - 2.0 * r * cov + r * r * self.den.variance();
        (r, (v.max(0.0) / n).sqrt() / b)
    }
}

impl Tally for RatioMoments {
    fn merge(&mut self, other: Self) {
        self.num.merge(other.num);
        self.den.merge(other.den);
        self.cross += other.cross;
    }
}

/// Monte Carlo result with provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub master_seed: u64,
    pub workers: usize,
    pub wall_time: f64,
}

impl Estimate {
    pub fn from_moments(m: &Moments, master_seed: u64, workers: usize, wall_time: f64) -> Self {
        Estimate {
            value: m.mean(),
            std_error: m.std_error(),
            n_samples: m.n,
            master_seed,
            workers,
            wall_time,
        }
    }

    pub fn lower(&self) -> f64 {
        self.value - CI_SIGMAS * self.std_error
    }

    pub fn upper(&self) -> f64 {
        self.value + CI_SIGMAS * self.std_error
    }

    /// Whether `x` lies within `k` standard errors.
    pub fn within(&self, x: f64, k: f64) -> bool {
        (self.value - x).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::NotApplicable => "N/A",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "PASS" => Some(Verdict::Pass),
            "FAIL" => Some(Verdict::Fail),
            "INCONCLUSIVE" => Some(Verdict::Inconclusive),
            "N/A" => Some(Verdict::NotApplicable),
            _ => None,
        }
    }

    /// Worst of two verdicts (FAIL > INCONCLUSIVE > PASS > N/A).
    pub fn and(self, other: Verdict) -> Verdict {
        let rank = |v: Verdict| match v {
            Verdict::NotApplicable => 0,
            Verdict::Pass => 1,
            Verdict::Inconclusive => 2,
            Verdict::Fail => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fitted straight-line slope with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
}

impl Slope {
    /// Slope is consistent with `≤ 0` at [`CI_SIGMAS`].
    pub fn non_increasing(&self) -> bool {
        self.slope - CI_SIGMAS * self.std_error <= 0.0
    }
}

/// Fits `y = a + b x` with weights `1/σ²`. Returns `None` with fewer than two
/// distinct abscissae or a non-positive σ.
pub fn weighted_slope(xs: &[f64], ys: &[f64], sigmas: &[f64]) -> Option<Slope> {
    if xs.len() < 2 || xs.len() != ys.len() || xs.len() != sigmas.len() {
        return None;
    }
    if sigmas.iter().any(|&s| !(s > 0.0)) {
        return None;
    }
    let w: Vec<f64> = sigmas.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let xm = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = ys.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&w).map(|(x, w)| w * (x - xm).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(&w)
        .map(|((x, y), w)| w * (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    Some(Slope {
        slope,
        std_error: (1.0 / sxx).sqrt(),
        intercept: ym - slope * xm,
    })
}

/// Ordinary least-squares slope of `y` on `x`. The standard error propagates
/// the per-point `σ` through the (unweighted) estimator:
/// `se² = Σ (x−x̄)² σ² / Sxx²`.
pub fn ols_slope(xs: &[f64], ys: &[f64], sigmas: &[f64]) -> Option<Slope> {
    if xs.len() < 2 || xs.len() != ys.len() || xs.len() != sigmas.len() {
        return None;
    }
    if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return None;
    }
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let var: f64 = xs.iter().zip(sigmas).map(|(x, s)| (x - xm).powi(2) * s * s).sum();
    let slope = sxy / sxx;
    Some(Slope {
        slope,
        std_error: var.sqrt() / sxx,
        intercept: ym - slope * xm,
    })
}

/// Least-squares slope of `log value` against `log t`, with standard errors
/// propagated to the log scale (`σ_log = se / value`).
pub fn log_log_slope(ts: &[f64], values: &[f64], std_errors: &[f64]) -> Option<Slope> {
    if values.iter().any(|&v| !(v > 0.0)) || ts.iter().any(|&t| !(t > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let sig: Vec<f64> = values.iter().zip(std_errors).map(|(v, s)| s / v).collect();
    ols_slope(&xs, &ys, &sig)
}
