use serde::{Deserialize, Serialize};

use super::ScalespaceError;

pub const MIN_DRAWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Credibility {
    CrediblyPositive,
    CrediblyNegative,
    NotCredible,
}

impl Credibility {
    /// Integer code used in grid files.
    pub fn code(self) -> i8 {
        match self {
            Credibility::CrediblyPositive => 1,
            Credibility::CrediblyNegative => -1,
            Credibility::NotCredible => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibilityMap {
    pub alpha: f64,
    pub labels: Vec<Credibility>,
    /// Fraction of draws with a strictly positive value.
    pub prob_positive: Vec<f64>,
    /// Fraction of draws with a strictly negative value.
    pub prob_negative: Vec<f64>,
}

impl CredibilityMap {
    pub fn count(&self, c: Credibility) -> usize {
        self.labels.iter().filter(|&&l| l == c).count()
    }

    pub fn codes(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.code() as f64).collect()
    }
}

/// Pointwise classification from detail draws (one row per draw): credibly
/// positive when `P(z > 0) ≥ α`, credibly negative when `P(z < 0) ≥ α`.
pub fn credibility_map<D: AsRef<[f64]>>(draws: &[D], alpha: f64) -> Result<CredibilityMap, ScalespaceError> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(ScalespaceError::InvalidLevel(alpha));
    }
    if draws.len() < MIN_DRAWS {
        return Err(ScalespaceError::TooFewDraws {
            needed: MIN_DRAWS,
            found: draws.len(),
        });
    }
    let n = draws[0].as_ref().len();
    let mut pos = vec![0usize; n];
    let mut neg = vec![0usize; n];
    for d in draws {
        let d = d.as_ref();
        if d.len() != n {
            return Err(ScalespaceError::DimensionMismatch { expected: n, found: d.len() });
        }
        for (i, &v) in d.iter().enumerate() {
            if v > 0.0 {
                pos[i] += 1;
            } else if v < 0.0 {
                neg[i] += 1;
            }
        }
    }
    let s = draws.len() as f64;
    let prob_positive: Vec<f64> = pos.iter().map(|&c| c as f64 / s).collect();
    let prob_negative: Vec<f64> = neg.iter().map(|&c| c as f64 / s).collect();
    let labels = prob_positive
        .iter()
        .zip(&prob_negative)
        .map(|(&p, &q)| {
            if p >= alpha {
                Credibility::CrediblyPositive
            } else if q >= alpha {
                Credibility::CrediblyNegative
            } else {
                Credibility::NotCredible
            }
        })
        .collect();
    Ok(CredibilityMap {
        alpha,
        labels,
        prob_positive,
        prob_negative,
    })
}
