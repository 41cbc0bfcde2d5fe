//! Norm-based utility measures and the temporal damping function.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::InstanceKind;

/// Base utility family of a measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaseMeasure {
    /// Every pattern counts once.
    Freq,
    /// Patterns weigh their norm.
    Area,
    /// `alpha^norm`, `alpha` in (0, 1].
    Decay(f64),
    /// Sum of the item weights inside the transaction.
    Util,
    /// `Util` divided by the norm.
    AvgUtil,
}

impl BaseMeasure {
    pub fn decay(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!(
                "decay factor {alpha} outside (0, 1]"
            )));
        }
        Ok(BaseMeasure::Decay(alpha))
    }

    /// The norm-only factor `f(ell)` before constraints.
    pub fn norm_factor(self, ell: usize) -> f64 {
        match self {
            BaseMeasure::Freq | BaseMeasure::Util => 1.0,
            BaseMeasure::Area => ell as f64,
            BaseMeasure::Decay(alpha) => alpha.powi(ell as i32),
            BaseMeasure::AvgUtil => 1.0 / ell as f64,
        }
    }

    /// Whether the base reads item weights.
    pub fn is_utility_based(self) -> bool {
        matches!(self, BaseMeasure::Util | BaseMeasure::AvgUtil)
    }

    pub fn supports(self, kind: InstanceKind) -> bool {
        match kind {
            InstanceKind::WeightedItemset => self.is_utility_based(),
            InstanceKind::PlainItemset | InstanceKind::Sequence => !self.is_utility_based(),
        }
    }
}

impl fmt::Display for BaseMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseMeasure::Freq => f.write_str("freq"),
            BaseMeasure::Area => f.write_str("area"),
            BaseMeasure::Decay(alpha) => write!(f, "decay:{alpha}"),
            BaseMeasure::Util => f.write_str("util"),
            BaseMeasure::AvgUtil => f.write_str("avgutil"),
        }
    }
}

impl FromStr for BaseMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "freq" => Ok(BaseMeasure::Freq),
            "area" => Ok(BaseMeasure::Area),
            "util" => Ok(BaseMeasure::Util),
            "avgutil" => Ok(BaseMeasure::AvgUtil),
            other => match other.strip_prefix("decay:") {
                Some(alpha) => {
                    let alpha: f64 = alpha.parse().map_err(|_| {
                        Error::Config(format!("invalid decay factor in `{s}`"))
                    })?;
                    BaseMeasure::decay(alpha)
                }
                None => Err(Error::Config(format!(
                    "unknown measure `{s}` (expected freq, area, decay:<alpha>, util or avgutil)"
                ))),
            },
        }
    }
}

/// Upper norm constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxNorm {
    Bounded(usize),
    Unbounded,
}

impl MaxNorm {
    pub fn admits(self, ell: usize) -> bool {
        match self {
            MaxNorm::Bounded(m) => ell <= m,
            MaxNorm::Unbounded => true,
        }
    }

    pub fn cap(self, norm: usize) -> usize {
        match self {
            MaxNorm::Bounded(m) => m.min(norm),
            MaxNorm::Unbounded => norm,
        }
    }
}

impl fmt::Display for MaxNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxNorm::Bounded(m) => write!(f, "{m}"),
            MaxNorm::Unbounded => f.write_str("inf"),
        }
    }
}

/// A base measure combined with `[min_norm, max_norm]` constraints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureSpec {
    base: BaseMeasure,
    min_norm: usize,
    max_norm: MaxNorm,
}

impl MeasureSpec {
    pub fn new(base: BaseMeasure, min_norm: usize, max_norm: MaxNorm) -> Result<Self> {
        if let BaseMeasure::Decay(alpha) = base {
            BaseMeasure::decay(alpha)?;
        }
        if min_norm == 0 {
            return Err(Error::Config("minimum norm must be at least 1".into()));
        }
        if let MaxNorm::Bounded(m) = max_norm {
            if m < min_norm {
                return Err(Error::Config(format!(
                    "maximum norm {m} below minimum norm {min_norm}"
                )));
            }
        }
        Ok(Self {
            base,
            min_norm,
            max_norm,
        })
    }

    /// No norm constraint.
    pub fn unconstrained(base: BaseMeasure) -> Self {
        Self::new(base, 1, MaxNorm::Unbounded).expect("valid base measure")
    }

    pub fn base(&self) -> BaseMeasure {
        self.base
    }

    pub fn min_norm(&self) -> usize {
        self.min_norm
    }

    pub fn max_norm(&self) -> MaxNorm {
        self.max_norm
    }

    pub fn admits(&self, ell: usize) -> bool {
        ell >= self.min_norm && self.max_norm.admits(ell)
    }

    /// `f(ell)` times the constraint indicator.
    pub fn norm_utility(&self, ell: usize) -> f64 {
        if ell == 0 || !self.admits(ell) {
            0.0
        } else {
            self.base.norm_factor(ell)
        }
    }

    /// Norms carrying weight for an instance of norm `norm`; may be empty.
    pub fn norm_range(&self, norm: usize) -> RangeInclusive<usize> {
        self.min_norm..=self.max_norm.cap(norm)
    }

    pub fn check_kind(&self, kind: InstanceKind) -> Result<()> {
        if self.base.supports(kind) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "measure {} cannot be used on {kind} data",
                self.base
            )))
        }
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}..{}]", self.base, self.min_norm, self.max_norm)
    }
}

/// Exponential temporal bias rate; zero gives the landmark window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingSpec {
    gamma: f64,
}

impl DampingSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("damping factor {gamma} outside [0, 1]")));
        }
        Ok(Self { gamma })
    }

    pub fn landmark() -> Self {
        Self { gamma: 0.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn factor(&self, t_now: f64, t_then: f64) -> Result<f64> {
        damping(self.gamma, t_now, t_then)
    }
}

/// `exp(-(t_now - t_then) * gamma)`.
pub fn damping(gamma: f64, t_now: f64, t_then: f64) -> Result<f64> {
    if t_then > t_now {
        return Err(Error::InvalidArgument(format!(
            "damping asked for future time {t_then} at {t_now}"
        )));
    }
    Ok((-(t_now - t_then) * gamma).exp())
}
