//! Laws of the independent decorations `Y_u` and their weak limit `Y_∞`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Time label at which a decoration is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecorationLabel {
    At(f64),
    /// Draw from the limit law `Y_∞`.
    Infinity,
}

/// A u-independent law used as building block.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseLaw {
    Zero,
    /// Laplace law with density `rate/2 · exp(-rate |z|)`.
    TwoSidedExponential {
        rate: f64,
    },
    Normal {
        sd: f64,
    },
}

impl BaseLaw {
    fn validate(&self, field: &str) -> Result<()> {
        match *self {
            BaseLaw::Zero => Ok(()),
            BaseLaw::TwoSidedExponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            BaseLaw::Normal { sd } if sd >= 0.0 && sd.is_finite() => Ok(()),
            _ => Err(Error::config(field, format!("invalid law parameters {self:?}"))),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            BaseLaw::Zero => 0.0,
            BaseLaw::TwoSidedExponential { rate } => {
                let u = open_uniform(rng);
                if u < 0.5 {
                    (2.0 * u).ln() / rate
                } else {
                    -(2.0 * (1.0 - u)).ln() / rate
                }
            }
            BaseLaw::Normal { sd } => sd * rng::normal(rng),
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            BaseLaw::Zero => {
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            BaseLaw::TwoSidedExponential { rate } => {
                if z < 0.0 {
                    0.5 * (rate * z).exp()
                } else {
                    1.0 - 0.5 * (-rate * z).exp()
                }
            }
            BaseLaw::Normal { sd } => {
                if sd == 0.0 {
                    BaseLaw::Zero.cdf(z)
                } else {
                    crate::oracles::normal_cdf(z / sd)
                }
            }
        }
    }

    /// `P(Y < z)`; differs from the cdf only at atoms.
    fn cdf_left(&self, z: f64) -> f64 {
        match *self {
            BaseLaw::Zero => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            BaseLaw::Normal { sd: 0.0 } => BaseLaw::Zero.cdf_left(z),
            _ => self.cdf(z),
        }
    }
}

/// Uniform on the open interval (0, 1).
#[inline]
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// One piece of a tabulated decoration law: for labels `u >= from`, `Y_u` is
/// uniform over `values` (until the next piece starts).
#[derive(Debug, Clone, PartialEq)]
pub struct TablePiece {
    pub from: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecorationKind {
    Zero,
    TwoSidedExponential {
        rate: f64,
    },
    /// `Y_u = B + drift_scale · exp(-decay_rate · u)` with `B` drawn from `base`;
    /// `Y_∞ = B`.
    LimitShifted {
        base: BaseLaw,
        drift_scale: f64,
        decay_rate: f64,
    },
    /// Piecewise-constant empirical laws; the last piece is also `Y_∞`.
    Table {
        pieces: Vec<TablePiece>,
    },
    /// `u ↦ inner law at horizon − u`; the limit law is the inner limit.
    Mirrored {
        inner: Box<DecorationKind>,
        horizon: f64,
    },
}

/// Law of the decoration field together with its tail constant.
#[derive(Debug, Clone, PartialEq)]
pub struct DecorationFamily {
    tail_delta: f64,
    kind: DecorationKind,
}

impl DecorationFamily {
    pub fn new(tail_delta: f64, kind: DecorationKind) -> Result<Self> {
        if !(tail_delta > 0.0 && tail_delta <= 0.5) {
            return Err(Error::config(
                "decorations.tail_delta",
                format!("must lie in (0, 1/2], got {tail_delta}"),
            ));
        }
        validate_kind(&kind)?;
        Ok(DecorationFamily { tail_delta, kind })
    }

    pub fn zero(tail_delta: f64) -> Self {
        DecorationFamily {
            tail_delta,
            kind: DecorationKind::Zero,
        }
    }

    pub fn tail_delta(&self) -> f64 {
        self.tail_delta
    }

    pub fn kind(&self) -> &DecorationKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, DecorationKind::Zero)
    }

    /// The law `u ↦ Y_{horizon − u}`.
    pub fn mirrored(&self, horizon: f64) -> Self {
        DecorationFamily {
            tail_delta: self.tail_delta,
            kind: DecorationKind::Mirrored {
                inner: Box::new(self.kind.clone()),
                horizon,
            },
        }
    }

    /// u-independent family whose every label has the law of `Y_∞`.
    pub fn limit_family(&self) -> Self {
        DecorationFamily {
            tail_delta: self.tail_delta,
            kind: limit_kind(&self.kind),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, label: DecorationLabel, rng: &mut R) -> f64 {
        sample_kind(&self.kind, label, rng)
    }

    #[inline]
    pub fn sample_at<R: Rng + ?Sized>(&self, u: f64, rng: &mut R) -> f64 {
        sample_kind(&self.kind, DecorationLabel::At(u), rng)
    }

    /// Analytic `P(Y_label ≤ z)`.
    pub fn cdf(&self, label: DecorationLabel, z: f64) -> f64 {
        cdf_kind(&self.kind, label, z, false)
    }

    /// Analytic `P(|Y_label| ≥ z)` for `z > 0`.
    pub fn abs_tail(&self, label: DecorationLabel, z: f64) -> f64 {
        let upper = 1.0 - cdf_kind(&self.kind, label, z, true);
        let lower = cdf_kind(&self.kind, label, -z, false);
        (upper + lower).clamp(0.0, 1.0)
    }

    /// The tail envelope `δ⁻¹ e^{−δ z}`.
    pub fn tail_envelope(&self, z: f64) -> f64 {
        (-self.tail_delta * z).exp() / self.tail_delta
    }

    /// Checks the tail envelope analytically at every `(label, z)` pair.
    /// Returns the first violation.
    pub fn check_tail_envelope(
        &self,
        labels: &[DecorationLabel],
        zs: &[f64],
    ) -> Option<(DecorationLabel, f64)> {
        for &label in labels {
            for &z in zs {
                if z > 0.0 && self.abs_tail(label, z) > self.tail_envelope(z) {
                    return Some((label, z));
                }
            }
        }
        None
    }

    /// Empirical version of [`check_tail_envelope`](Self::check_tail_envelope):
    /// a pair violates when the sample frequency exceeds the envelope by more
    /// than three standard errors.
    pub fn check_tail_empirical<R: Rng + ?Sized>(
        &self,
        labels: &[DecorationLabel],
        zs: &[f64],
        n: usize,
        rng: &mut R,
    ) -> Option<(DecorationLabel, f64)> {
        let mut draws = vec![0.0; n];
        for &label in labels {
            for d in draws.iter_mut() {
                *d = self.sample(label, rng).abs();
            }
            for &z in zs {
                let p = draws.iter().filter(|&&d| d >= z).count() as f64 / n as f64;
                let se = (p * (1.0 - p) / n as f64).sqrt();
                if p - 3.0 * se > self.tail_envelope(z) {
                    return Some((label, z));
                }
            }
        }
        None
    }
}

fn validate_kind(kind: &DecorationKind) -> Result<()> {
    match kind {
        DecorationKind::Zero => Ok(()),
        DecorationKind::TwoSidedExponential { rate } => {
            BaseLaw::TwoSidedExponential { rate: *rate }.validate("decorations.rate")
        }
        DecorationKind::LimitShifted {
            base,
            drift_scale,
            decay_rate,
        } => {
            base.validate("decorations.base")?;
            if !drift_scale.is_finite() {
                return Err(Error::config("decorations.drift_scale", "must be finite"));
            }
            if !(*decay_rate > 0.0 && decay_rate.is_finite()) {
                return Err(Error::config("decorations.decay_rate", "must be positive"));
            }
            Ok(())
        }
        DecorationKind::Table { pieces } => {
            if pieces.is_empty() || pieces.iter().any(|p| p.values.is_empty()) {
                return Err(Error::config("decorations.values", "empty decoration table"));
            }
            if pieces[0].from != 0.0 {
                return Err(Error::config("decorations.values", "first piece must start at 0"));
            }
            if pieces.windows(2).any(|w| w[0].from >= w[1].from) {
                return Err(Error::config("decorations.values", "pieces not increasing"));
            }
            if pieces.iter().flat_map(|p| &p.values).any(|v| !v.is_finite()) {
                return Err(Error::config("decorations.values", "non-finite table value"));
            }
            Ok(())
        }
        DecorationKind::Mirrored { inner, horizon } => {
            if !(*horizon >= 0.0) {
                return Err(Error::config("decorations.horizon", "must be non-negative"));
            }
            validate_kind(inner)
        }
    }
}

fn limit_kind(kind: &DecorationKind) -> DecorationKind {
    match kind {
        DecorationKind::LimitShifted { base, .. } => match base {
            BaseLaw::Zero => DecorationKind::Zero,
            BaseLaw::TwoSidedExponential { rate } => DecorationKind::TwoSidedExponential { rate: *rate },
            BaseLaw::Normal { .. } => DecorationKind::LimitShifted {
                base: base.clone(),
                drift_scale: 0.0,
                decay_rate: 1.0,
            },
        },
        DecorationKind::Table { pieces } => DecorationKind::Table {
            pieces: vec![TablePiece {
                from: 0.0,
                values: pieces.last().map(|p| p.values.clone()).unwrap_or_default(),
            }],
        },
        DecorationKind::Mirrored { inner, .. } => limit_kind(inner),
        other => other.clone(),
    }
}

fn table_piece(pieces: &[TablePiece], label: DecorationLabel) -> &TablePiece {
    match label {
        DecorationLabel::Infinity => pieces.last().expect("validated non-empty"),
        DecorationLabel::At(u) => {
            let idx = pieces.partition_point(|p| p.from <= u);
            &pieces[idx.saturating_sub(1)]
        }
    }
}

fn sample_kind<R: Rng + ?Sized>(kind: &DecorationKind, label: DecorationLabel, rng: &mut R) -> f64 {
    match kind {
        DecorationKind::Zero => 0.0,
        DecorationKind::TwoSidedExponential { rate } => {
            BaseLaw::TwoSidedExponential { rate: *rate }.sample(rng)
        }
        DecorationKind::LimitShifted {
            base,
            drift_scale,
            decay_rate,
        } => {
            let b = base.sample(rng);
            match label {
                DecorationLabel::Infinity => b,
                DecorationLabel::At(u) => b + drift_scale * (-decay_rate * u).exp(),
            }
        }
        DecorationKind::Table { pieces } => {
            let values = &table_piece(pieces, label).values;
            let idx = ((rng::uniform(rng) * values.len() as f64) as usize).min(values.len() - 1);
            values[idx]
        }
        DecorationKind::Mirrored { inner, horizon } => sample_kind(inner, mirror_label(label, *horizon), rng),
    }
}

fn mirror_label(label: DecorationLabel, horizon: f64) -> DecorationLabel {
    match label {
        DecorationLabel::At(u) => DecorationLabel::At((horizon - u).max(0.0)),
        DecorationLabel::Infinity => DecorationLabel::Infinity,
    }
}

/// `P(Y ≤ z)`, or `P(Y < z)` when `strict`.
fn cdf_kind(kind: &DecorationKind, label: DecorationLabel, z: f64, strict: bool) -> f64 {
    let base_cdf = |law: &BaseLaw, z: f64| if strict { law.cdf_left(z) } else { law.cdf(z) };
    match kind {
        DecorationKind::Zero => base_cdf(&BaseLaw::Zero, z),
        DecorationKind::TwoSidedExponential { rate } => {
            base_cdf(&BaseLaw::TwoSidedExponential { rate: *rate }, z)
        }
        DecorationKind::LimitShifted {
            base,
            drift_scale,
            decay_rate,
        } => {
            let shift = match label {
                DecorationLabel::Infinity => 0.0,
                DecorationLabel::At(u) => drift_scale * (-decay_rate * u).exp(),
            };
            base_cdf(base, z - shift)
        }
        DecorationKind::Table { pieces } => {
            let values = &table_piece(pieces, label).values;
            let hits = values
                .iter()
                .filter(|&&v| if strict { v < z } else { v <= z })
                .count();
            hits as f64 / values.len() as f64
        }
        DecorationKind::Mirrored { inner, horizon } => {
            cdf_kind(inner, mirror_label(label, *horizon), z, strict)
        }
    }
}

/// Draws one decoration per label, in order, from `rng`.
pub fn sample_decorations<R: Rng + ?Sized>(
    fam: &DecorationFamily,
    labels: &[DecorationLabel],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if labels
        .iter()
        .any(|l| matches!(l, DecorationLabel::At(u) if !(*u >= 0.0 && u.is_finite())))
    {
        return Err(Error::domain("decoration labels must be finite and non-negative"));
    }
    Ok(labels.iter().map(|&l| fam.sample(l, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn laplace(rate: f64) -> DecorationFamily {
        DecorationFamily::new(0.5, DecorationKind::TwoSidedExponential { rate }).unwrap()
    }

    #[test]
    fn zero_family_is_identically_zero() {
        let fam = DecorationFamily::zero(0.25);
        let labels = [
            DecorationLabel::At(0.0),
            DecorationLabel::At(3.5),
            DecorationLabel::Infinity,
        ];
        let ys = sample_decorations(&fam, &labels, &mut RngStream::new(1, 0).generator()).unwrap();
        assert_eq!(ys, vec![0.0; 3]);
    }

    #[test]
    fn rejects_bad_labels_and_params() {
        let fam = DecorationFamily::zero(0.25);
        let mut g = RngStream::new(1, 0).generator();
        assert!(sample_decorations(&fam, &[DecorationLabel::At(-1.0)], &mut g).is_err());
        assert!(sample_decorations(&fam, &[DecorationLabel::At(f64::INFINITY)], &mut g).is_err());
        assert!(DecorationFamily::new(0.0, DecorationKind::Zero).is_err());
        assert!(DecorationFamily::new(0.6, DecorationKind::Zero).is_err());
        assert!(DecorationFamily::new(0.5, DecorationKind::TwoSidedExponential { rate: -1.0 }).is_err());
        assert!(DecorationFamily::new(0.5, DecorationKind::Table { pieces: vec![] }).is_err());
    }

    #[test]
    fn laplace_abs_tail_is_exponential() {
        let fam = laplace(1.0);
        for z in [0.5, 1.0, 2.0, 5.0] {
            let p = fam.abs_tail(DecorationLabel::At(0.0), z);
            assert!((p - (-z).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn builtin_families_meet_envelope() {
        let zs: Vec<f64> = (1..200).map(|i| i as f64 * 0.25).collect();
        let labels = [
            DecorationLabel::At(0.0),
            DecorationLabel::At(5.0),
            DecorationLabel::Infinity,
        ];
        assert_eq!(laplace(1.0).check_tail_envelope(&labels, &zs), None);
        let shifted = DecorationFamily::new(
            0.25,
            DecorationKind::LimitShifted {
                base: BaseLaw::TwoSidedExponential { rate: 1.0 },
                drift_scale: 1.0,
                decay_rate: 1.0,
            },
        )
        .unwrap();
        assert_eq!(shifted.check_tail_envelope(&labels, &zs), None);
        // a rate-0.1 Laplace law is too heavy for delta = 0.5
        let heavy = DecorationFamily::new(0.5, DecorationKind::TwoSidedExponential { rate: 0.1 }).unwrap();
        assert!(heavy.check_tail_envelope(&labels, &zs).is_some());
    }

    #[test]
    fn limit_family_drops_drift() {
        let fam = DecorationFamily::new(
            0.5,
            DecorationKind::LimitShifted {
                base: BaseLaw::Zero,
                drift_scale: 2.0,
                decay_rate: 1.0,
            },
        )
        .unwrap();
        let mut g = RngStream::new(1, 0).generator();
        assert_eq!(fam.sample_at(0.0, &mut g), 2.0);
        assert_eq!(fam.sample(DecorationLabel::Infinity, &mut g), 0.0);
        assert!(fam.limit_family().is_zero());
    }

    #[test]
    fn table_pieces_switch_at_breakpoints() {
        let fam = DecorationFamily::new(
            0.5,
            DecorationKind::Table {
                pieces: vec![
                    TablePiece {
                        from: 0.0,
                        values: vec![1.0],
                    },
                    TablePiece {
                        from: 2.0,
                        values: vec![-1.0],
                    },
                ],
            },
        )
        .unwrap();
        let mut g = RngStream::new(1, 0).generator();
        assert_eq!(fam.sample_at(1.99, &mut g), 1.0);
        assert_eq!(fam.sample_at(2.0, &mut g), -1.0);
        assert_eq!(fam.sample(DecorationLabel::Infinity, &mut g), -1.0);
        let m = fam.mirrored(10.0);
        assert_eq!(m.sample_at(9.0, &mut g), 1.0);
        assert_eq!(m.sample_at(1.0, &mut g), -1.0);
    }
}
