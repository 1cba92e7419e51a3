//! Roughness-penalty smoothing `S_λ = (I + λQ)⁻¹`, the scale derivative
//! `D_λx = λ S_λ Q S_λ x`, scale selection from minima of `‖D_λx‖`, detail
//! decomposition and pointwise credibility maps.

mod credibility;
mod selection;
mod smoother;

pub use credibility::{credibility_map, Credibility, CredibilityMap};
pub use selection::{local_minima, most_prominent_minimum, scale_uncertainty, select_scales, ScaleInterval, ScaleUncertainty};
pub use smoother::{decompose, norm_curve, scale_derivative, smooth, DetailStack, NormCurves, Smoother};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::SparseError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalespaceError {
    #[error("non-finite value at position {0}")]
    NonFiniteInput(usize),
    #[error("vector length {found} does not match dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("smoothing parameter must be non-negative (got {0})")]
    InvalidLambda(f64),
    #[error("invalid scale grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid scale set: {0}")]
    InvalidScaleSet(&'static str),
    #[error("credibility level must lie in (0.5, 1) (got {0})")]
    InvalidLevel(f64),
    #[error("at least {needed} draws are required (got {found})")]
    TooFewDraws { needed: usize, found: usize },
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Euclidean,
    #[default]
    Maximum,
}

impl NormKind {
    pub fn apply(self, v: &[f64]) -> f64 {
        match self {
            NormKind::Euclidean => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
            NormKind::Maximum => v.iter().fold(0.0, |m: f64, a| m.max(a.abs())),
        }
    }
}

/// Log₁₀-spaced grid of smoothing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleGrid {
    pub log_lo: f64,
    pub log_hi: f64,
    pub points_per_decade: usize,
}

impl Default for ScaleGrid {
    fn default() -> Self {
        Self {
            log_lo: -1.0,
            log_hi: 5.0,
            points_per_decade: 30,
        }
    }
}

impl ScaleGrid {
    pub fn new(log_lo: f64, log_hi: f64, points_per_decade: usize) -> Result<Self, ScalespaceError> {
        let g = Self {
            log_lo,
            log_hi,
            points_per_decade,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), ScalespaceError> {
        if !(self.log_lo.is_finite() && self.log_hi.is_finite() && self.log_hi > self.log_lo) {
            return Err(ScalespaceError::InvalidGrid("bounds must be finite and increasing"));
        }
        if self.points_per_decade == 0 || self.len() < 3 {
            return Err(ScalespaceError::InvalidGrid("at least 3 points are required"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.log_hi - self.log_lo) * self.points_per_decade as f64 + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn log_lambdas(&self) -> Vec<f64> {
        let step = 1.0 / self.points_per_decade as f64;
        (0..self.len()).map(|k| self.log_lo + k as f64 * step).collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.log_lambdas().into_iter().map(|l| 10f64.powf(l)).collect()
    }
}

/// `0 = λ_1 < λ_2 < … < λ_L = ∞`; only the interior values are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScaleSetRepr", into = "ScaleSetRepr")]
pub struct ScaleSet {
    interior: Vec<f64>,
    source_norm: Option<NormKind>,
}

impl ScaleSet {
    pub fn new(interior: Vec<f64>, source_norm: Option<NormKind>) -> Result<Self, ScalespaceError> {
        if interior.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(ScalespaceError::InvalidScaleSet("interior scales must be positive and finite"));
        }
        if interior.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScalespaceError::InvalidScaleSet("interior scales must be increasing"));
        }
        Ok(Self {
            interior,
            source_norm,
        })
    }

    /// Data and mean only.
    pub fn trivial() -> Self {
        Self {
            interior: Vec::new(),
            source_norm: None,
        }
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    pub fn source_norm(&self) -> Option<NormKind> {
        self.source_norm
    }

    /// Number of details `L`, the final mean included.
    pub fn n_details(&self) -> usize {
        self.interior.len() + 2
    }

    /// All `L` scales with `f64::INFINITY` as the final element.
    pub fn lambdas(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_details());
        v.push(0.0);
        v.extend_from_slice(&self.interior);
        v.push(f64::INFINITY);
        v
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LambdaRepr {
    Finite(f64),
    Symbol(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleSetRepr {
    lambdas: Vec<LambdaRepr>,
    #[serde(default)]
    source_norm: Option<NormKind>,
}

impl From<ScaleSet> for ScaleSetRepr {
    fn from(s: ScaleSet) -> Self {
        let lambdas = s
            .lambdas()
            .into_iter()
            .map(|l| {
                if l.is_infinite() {
                    LambdaRepr::Symbol("inf".into())
                } else {
                    LambdaRepr::Finite(l)
                }
            })
            .collect();
        Self {
            lambdas,
            source_norm: s.source_norm,
        }
    }
}

impl TryFrom<ScaleSetRepr> for ScaleSet {
    type Error = ScalespaceError;

    fn try_from(r: ScaleSetRepr) -> Result<Self, Self::Error> {
        let n = r.lambdas.len();
        if n < 2 {
            return Err(ScalespaceError::InvalidScaleSet("at least 0 and inf are required"));
        }
        if !matches!(r.lambdas[0], LambdaRepr::Finite(v) if v == 0.0) {
            return Err(ScalespaceError::InvalidScaleSet("first scale must be 0"));
        }
        if !matches!(&r.lambdas[n - 1], LambdaRepr::Symbol(s) if s == "inf") {
            return Err(ScalespaceError::InvalidScaleSet("last scale must be \"inf\""));
        }
        let interior = r.lambdas[1..n - 1]
            .iter()
            .map(|l| match l {
                LambdaRepr::Finite(v) => Ok(*v),
                LambdaRepr::Symbol(_) => Err(ScalespaceError::InvalidScaleSet("only the last scale may be inf")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        ScaleSet::new(interior, r.source_norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_181_points() {
        let g = ScaleGrid::default();
        assert_eq!(g.len(), 181);
        let l = g.lambdas();
        assert!((l[0] - 0.1).abs() < 1e-15 && (l[180] / 1e5 - 1.0).abs() < 1e-12);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn scale_set_json_uses_inf_token() {
        let s = ScaleSet::new(vec![30.0], Some(NormKind::Maximum)).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"lambdas":[0.0,30.0,"inf"],"source_norm":"maximum"}"#);
        let back: ScaleSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<ScaleSet>(r#"{"lambdas":[1.0,"inf"]}"#).is_err());
    }

    #[test]
    fn norms() {
        let v = [3.0, -4.0];
        assert_eq!(NormKind::Euclidean.apply(&v), 5.0);
        assert_eq!(NormKind::Maximum.apply(&v), 4.0);
    }
}
