use serde::{Deserialize, Serialize};

use super::{NormKind, ScaleGrid, ScaleSet, ScalespaceError, Smoother};
use crate::sampler::{posterior_mean, PosteriorChain, SamplerError};
use crate::stats;

/// Indices of strict interior local minima. A flat run counts once, at its
/// middle index, when both neighbouring values are larger.
pub fn local_minima(curve: &[f64]) -> Vec<usize> {
    let n = curve.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && curve[j + 1] == curve[i] {
            j += 1;
        }
        if j + 1 < n && curve[i - 1] > curve[i] && curve[j + 1] > curve[i] {
            out.push((i + j) / 2);
        }
        i = j + 1;
    }
    out
}

/// Interior minimum with the largest drop in log norm below the lower of the
/// highest curve values on either side.
pub fn most_prominent_minimum(curve: &[f64]) -> Option<usize> {
    let log: Vec<f64> = curve.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    local_minima(curve)
        .into_iter()
        .map(|i| {
            let left = log[..i].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let right = log[i + 1..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (i, left.min(right) - log[i])
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

/// `{0} ∪ {λ at interior minima of the curve} ∪ {∞}`.
pub fn select_scales(curve: &[f64], grid: &ScaleGrid, norm: Option<NormKind>) -> Result<ScaleSet, ScalespaceError> {
    let lambdas = grid.lambdas();
    if curve.len() != lambdas.len() {
        return Err(ScalespaceError::DimensionMismatch {
            expected: lambdas.len(),
            found: curve.len(),
        });
    }
    ScaleSet::new(local_minima(curve).into_iter().map(|i| lambdas[i]).collect(), norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleInterval {
    /// Scale selected from the posterior mean.
    pub lambda: f64,
    pub lo: f64,
    pub hi: f64,
    /// Draws contributing a matched minimum.
    pub n_matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleUncertainty {
    pub reference: ScaleSet,
    pub intervals: Vec<ScaleInterval>,
    /// Fraction of draws whose minima count differs from the reference.
    pub unmatched_fraction: f64,
    pub draw_scales: Vec<Vec<f64>>,
}

/// Scale selection on the posterior mean and on every draw. Each draw
/// minimum is assigned to the nearest reference scale in log λ; a reference
/// scale keeps the nearest of its claimants and other claimants are dropped.
pub fn scale_uncertainty(
    chain: &PosteriorChain,
    smoother: &Smoother,
    grid: &ScaleGrid,
    norm: NormKind,
    level: f64,
) -> Result<ScaleUncertainty, ScalespaceError> {
    let mean = posterior_mean(chain).map_err(|e| match e {
        SamplerError::EmptyChain => ScalespaceError::TooFewDraws { needed: 1, found: 0 },
        _ => ScalespaceError::InvalidScaleSet("invalid chain"),
    })?;
    let reference_curve = smoother.norm_curves(&mean, grid)?;
    let reference = select_scales(reference_curve.get(norm), grid, Some(norm))?;
    let draws: Vec<&[f64]> = chain.draws().collect();
    let curves = smoother.norm_curves_many(&draws, grid)?;
    let draw_scales: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| select_scales(c.get(norm), grid, Some(norm)).map(|s| s.interior().to_vec()))
        .collect::<Result<_, _>>()?;
    Ok(summarise(reference, draw_scales, level))
}

fn summarise(reference: ScaleSet, draw_scales: Vec<Vec<f64>>, level: f64) -> ScaleUncertainty {
    let refs = reference.interior();
    let mut matched: Vec<Vec<f64>> = vec![Vec::new(); refs.len()];
    let mut unmatched = 0;
    for scales in &draw_scales {
        if scales.len() != refs.len() {
            unmatched += 1;
        }
        let mut best: Vec<Option<(f64, f64)>> = vec![None; refs.len()];
        for &s in scales {
            let Some((r, dist)) = refs
                .iter()
                .enumerate()
                .map(|(r, &l)| (r, (s.ln() - l.ln()).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
            else {
                continue;
            };
            if best[r].is_none_or(|(d, _)| dist < d) {
                best[r] = Some((dist, s));
            }
        }
        for (r, b) in best.into_iter().enumerate() {
            if let Some((_, s)) = b {
                matched[r].push(s);
            }
        }
    }
    let intervals = refs
        .iter()
        .zip(&matched)
        .map(|(&lambda, vals)| {
            let (lo, hi) = if vals.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                stats::central_interval(vals, level)
            };
            ScaleInterval {
                lambda,
                lo,
                hi,
                n_matched: vals.len(),
            }
        })
        .collect();
    ScaleUncertainty {
        reference,
        intervals,
        unmatched_fraction: unmatched as f64 / draw_scales.len().max(1) as f64,
        draw_scales,
    }
}
