//! Barrier curves `γ_{t,u}`, the wedge function and the envelope/regularity validators.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Distance from `u` to the nearer end of `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WedgeValue(pub f64);

impl WedgeValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn wedge(t: f64, u: f64) -> Result<WedgeValue> {
    if !(t >= 0.0) || !(u >= 0.0 && u <= t) {
        return Err(Error::domain(format!("u = {u} outside [0, {t}]")));
    }
    Ok(WedgeValue(wedge_raw(t, u)))
}

#[inline]
fn wedge_raw(t: f64, u: f64) -> f64 {
    u.min(t - u).max(0.0)
}

/// Upper envelope `δ⁻¹(1 + w^{1/2−δ})` at wedge value `w`.
#[inline]
pub fn envelope_upper(delta: f64, w: f64) -> f64 {
    (1.0 + w.powf(0.5 - delta)) / delta
}

/// `offset + scale · u^exponent`, a one-sided limit profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub offset: f64,
    pub scale: f64,
    pub exponent: f64,
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile {
            offset: c,
            scale: 0.0,
            exponent: 0.0,
        }
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        if self.scale == 0.0 {
            self.offset
        } else {
            self.offset + self.scale * u.max(0.0).powf(self.exponent)
        }
    }
}

/// How the two limit profiles are glued on a finite horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blend {
    /// `plus(u)` on the first half, `minus(t − u)` on the second.
    Nearest,
    /// `(1 − u/t)·plus(u) + (u/t)·minus(t − u)`.
    Linear,
}

type CurveFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type LimitFn = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// Curve given by a closure `(t, u) ↦ γ_{t,u}`, with optional declared limits
/// `u ↦ (γ_{∞,u}, γ_{∞,−u})`.
#[derive(Clone)]
pub struct CustomCurve {
    pub eval: Arc<CurveFn>,
    pub limits: Option<Arc<LimitFn>>,
}

impl CustomCurve {
    pub fn new(eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomCurve {
            eval: Arc::new(eval),
            limits: None,
        }
    }

    pub fn with_limits(mut self, limits: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        self.limits = Some(Arc::new(limits));
        self
    }
}

impl fmt::Debug for CustomCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCurve")
            .field("limits", &self.limits.is_some())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum CurveKind {
    /// `δ⁻¹(1 + ∧ᵗ(u)^{1/2−δ})`, or without the `1` when `include_one` is off.
    CanonicalPlus,
    Constant(f64),
    LimitProfile {
        plus: Profile,
        minus: Profile,
        blend: Blend,
    },
    Custom(CustomCurve),
}

/// A barrier family `γ = (γ_t)` tagged with its envelope constant `δ`.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    delta: f64,
    kind: CurveKind,
    include_one: bool,
}

impl CurveSpec {
    pub fn new(delta: f64, kind: CurveKind) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::config(
                "curve.delta",
                format!("must lie in (0, 1/2), got {delta}"),
            ));
        }
        if let CurveKind::Constant(c) = kind {
            if !c.is_finite() {
                return Err(Error::config("curve.value", "constant must be finite"));
            }
        }
        Ok(CurveSpec {
            delta,
            kind,
            include_one: true,
        })
    }

    pub fn canonical_plus(delta: f64) -> Result<Self> {
        Self::new(delta, CurveKind::CanonicalPlus)
    }

    pub fn constant(delta: f64, c: f64) -> Result<Self> {
        Self::new(delta, CurveKind::Constant(c))
    }

    /// Drops the `1` inside the canonical envelope (as in the bare Brownian
    /// motion barrier estimates). No effect on other kinds.
    pub fn without_one(mut self) -> Self {
        self.include_one = false;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn includes_one(&self) -> bool {
        self.include_one
    }

    /// The curve `u ↦ γ_{t, t−u}`; its limits are swapped.
    pub fn mirrored(&self) -> Self {
        let inner = self.clone();
        let lim = self.clone();
        let mut custom = CustomCurve::new(move |t, u| inner.value_at(t, (t - u).max(0.0)));
        if self.has_limits() {
            custom = custom.with_limits(move |u| {
                let (p, m) = lim.limits_raw(u);
                (m, p)
            });
        }
        CurveSpec {
            delta: self.delta,
            kind: CurveKind::Custom(custom),
            include_one: self.include_one,
        }
    }

    pub fn has_limits(&self) -> bool {
        !matches!(&self.kind, CurveKind::Custom(c) if c.limits.is_none())
    }

    /// `γ_{t,u}` without range checks; `u` is expected in `[0, t]`.
    #[inline]
    pub fn value_at(&self, t: f64, u: f64) -> f64 {
        match &self.kind {
            CurveKind::CanonicalPlus => {
                let w = wedge_raw(t, u);
                if self.include_one {
                    envelope_upper(self.delta, w)
                } else {
                    w.powf(0.5 - self.delta) / self.delta
                }
            }
            CurveKind::Constant(c) => *c,
            CurveKind::LimitProfile { plus, minus, blend } => match blend {
                Blend::Nearest => {
                    if u <= t - u {
                        plus.value(u)
                    } else {
                        minus.value(t - u)
                    }
                }
                Blend::Linear => {
                    if t <= 0.0 {
                        plus.value(0.0)
                    } else {
                        let a = u / t;
                        (1.0 - a) * plus.value(u) + a * minus.value(t - u)
                    }
                }
            },
            CurveKind::Custom(c) => (c.eval)(t, u),
        }
    }

    /// Limits assuming they exist (see [`has_limits`](Self::has_limits)).
    #[inline]
    fn limits_raw(&self, u: f64) -> (f64, f64) {
        match &self.kind {
            CurveKind::CanonicalPlus => {
                let v = if self.include_one {
                    envelope_upper(self.delta, u)
                } else {
                    u.powf(0.5 - self.delta) / self.delta
                };
                (v, v)
            }
            CurveKind::Constant(c) => (*c, *c),
            CurveKind::LimitProfile { plus, minus, .. } => (plus.value(u), minus.value(u)),
            CurveKind::Custom(c) => c.limits.as_ref().map_or((f64::NAN, f64::NAN), |l| l(u)),
        }
    }

    /// `γ_{∞,u}`.
    #[inline]
    pub fn limit_plus(&self, u: f64) -> f64 {
        self.limits_raw(u).0
    }

    /// `γ_{∞,−u}`.
    #[inline]
    pub fn limit_minus(&self, u: f64) -> f64 {
        self.limits_raw(u).1
    }
}

pub fn eval_curve(c: &CurveSpec, t: f64, u: f64) -> Result<f64> {
    if !(t >= 0.0) || !(u >= 0.0 && u <= t) {
        return Err(Error::domain(format!("u = {u} outside [0, {t}]")));
    }
    Ok(c.value_at(t, u))
}

/// `(γ_{∞,u}, γ_{∞,−u})`. The value at `u = 0` of the second component is
/// `lim γ_{t,t}`.
pub fn curve_limits(c: &CurveSpec, u: f64) -> Result<(f64, f64)> {
    if !(u >= 0.0) {
        return Err(Error::domain(format!(
            "limit argument must be non-negative, got {u}"
        )));
    }
    if !c.has_limits() {
        return Err(Error::config("curve.limits", "custom curve declares no limits"));
    }
    Ok(c.limits_raw(u))
}

/// Outcome of a grid check; `first_violation` holds `(u, γ_{t,u})` or, for
/// regularity, `(u, r, u')`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub ok: bool,
    pub first_violation: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub ok: bool,
    pub first_violation: Option<(f64, f64, f64)>,
}

/// Number of grid points used when no grid is supplied.
pub const DEFAULT_ENVELOPE_POINTS: usize = 1000;
/// Lattice size per axis for the default regularity triples.
pub const DEFAULT_REGULARITY_LATTICE: usize = 50;

/// Uniform grid of `points` values covering `[0, t]` including both ends.
pub fn uniform_grid(t: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let last = points - 1;
            (0..points)
                .map(|i| if i == last { t } else { t * i as f64 / last as f64 })
                .collect()
        }
    }
}

/// All ordered triples `u < r < u'` from a lattice of `m` interior points of `(0, t)`.
pub fn regularity_triples(t: f64, m: usize) -> Vec<(f64, f64, f64)> {
    let pts: Vec<f64> = (1..=m).map(|i| t * i as f64 / (m + 1) as f64).collect();
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                out.push((pts[i], pts[j], pts[k]));
            }
        }
    }
    out
}

/// Checks `−δ⁻¹ ≤ γ_{t,u} ≤ δ⁻¹(1 + ∧ᵗ(u)^{1/2−δ})` on `grid`.
pub fn validate_envelope(c: &CurveSpec, t: f64, grid: &[f64]) -> Result<EnvelopeReport> {
    let lower = -1.0 / c.delta;
    for &u in grid {
        let g = eval_curve(c, t, u)?;
        let upper = envelope_upper(c.delta, wedge_raw(t, u));
        if !(g >= lower && g <= upper) {
            return Ok(EnvelopeReport {
                ok: false,
                first_violation: Some((u, g)),
            });
        }
    }
    Ok(EnvelopeReport {
        ok: true,
        first_violation: None,
    })
}

/// Checks both regularity inequalities for every triple `(u, r, u')`.
pub fn validate_regularity(c: &CurveSpec, t: f64, triples: &[(f64, f64, f64)]) -> Result<RegularityReport> {
    let d = c.delta;
    for &(u, r, u2) in triples {
        if !(0.0 < u && u < r && r < u2 && u2 < t) {
            return Err(Error::domain(format!(
                "malformed triple ({u}, {r}, {u2}) for t = {t}"
            )));
        }
        let g_r = c.value_at(t, r);
        let first = c.value_at(t, u) - (u / r) * g_r <= envelope_upper(d, wedge_raw(r, u));
        let second =
            c.value_at(t, u2) - (t - u2) / (t - r) * g_r <= envelope_upper(d, wedge_raw(t - r, u2 - r));
        if !(first && second) {
            return Ok(RegularityReport {
                ok: false,
                first_violation: Some((u, r, u2)),
            });
        }
    }
    Ok(RegularityReport {
        ok: true,
        first_violation: None,
    })
}
