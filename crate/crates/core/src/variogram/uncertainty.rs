use rand::Rng;
use serde::{Deserialize, Serialize};

use super::empirical::{empirical_variogram, transect_variogram, BinSpec, Direction, VariogramBins};
use super::fit::{fit_matern, FitConfig, MaternFit};
use super::VariogramError;
use crate::lattice::Lattice;
use crate::stats::central_interval;

pub const MIN_UNCERTAINTY_DRAWS: usize = 20;
/// Largest share of per-draw fits allowed to fail before the report is flagged.
pub const MAX_FAILED_FRACTION: f64 = 0.1;

/// Keeps one transect chosen uniformly at random from every run of
/// `keep_one_of` consecutive transects (rows for E–W, columns for N–S). A
/// trailing partial run also contributes one transect.
pub fn transect_subsample<R: Rng + ?Sized>(
    lat: &Lattice,
    direction: Direction,
    keep_one_of: usize,
    rng: &mut R,
) -> Result<Vec<usize>, VariogramError> {
    let n = match direction {
        Direction::EastWest => lat.n1(),
        Direction::NorthSouth => lat.n2(),
        Direction::Omni => return Err(VariogramError::TransectNeedsAxis),
    };
    if keep_one_of == 0 {
        return Err(VariogramError::InvalidBins);
    }
    Ok((0..n)
        .step_by(keep_one_of)
        .map(|start| start + rng.gen_range(0..keep_one_of.min(n - start)))
        .collect())
}

/// Empirical variogram settings plus the fit configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariogramConfig {
    pub bins: BinSpec,
    /// Restricts directional estimates to within-transect pairs on a random
    /// subset of transects.
    pub transect_keep_one_of: Option<usize>,
    pub fit: FitConfig,
}

impl VariogramConfig {
    pub fn directional(direction: Direction) -> Self {
        Self {
            bins: BinSpec::directional(direction),
            ..Self::default()
        }
    }
}

/// Bins for one field, restricted to `transects` when given.
pub fn field_variogram(
    field: &[f64],
    lat: &Lattice,
    spec: &BinSpec,
    transects: Option<&[usize]>,
) -> Result<VariogramBins, VariogramError> {
    match transects {
        Some(t) => transect_variogram(field, lat, spec.direction, t, spec.max_lag, spec.n_bins),
        None => empirical_variogram(field, lat, spec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamIntervals {
    pub level: f64,
    pub range: (f64, f64),
    pub partial_sill: (f64, f64),
    pub smoothness: (f64, f64),
    /// Unbounded effective ranges enter at the domain extent.
    pub effective_range: (f64, f64),
}

impl ParamIntervals {
    fn contains(&self, fit: &MaternFit, extent: f64) -> bool {
        let inside = |(lo, hi): (f64, f64), v: f64| {
            let slack = 1e-9 * v.abs().max(1e-300);
            v >= lo - slack && v <= hi + slack
        };
        inside(self.range, fit.params.range)
            && inside(self.partial_sill, fit.params.partial_sill)
            && inside(self.smoothness, fit.params.smoothness)
            && inside(self.effective_range, fit.effective_range.value.min(extent))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub direction: Direction,
    /// Fit to the posterior-mean field.
    pub point: MaternFit,
    /// Per-draw fits; `None` for draws whose fit failed.
    pub draws: Vec<Option<MaternFit>>,
    pub intervals: Option<ParamIntervals>,
    pub n_failed: usize,
    /// More than the tolerated share of draws failed.
    pub excess_failures: bool,
    /// Some point estimate lies outside its interval.
    pub point_outside: bool,
    pub extent: f64,
}

impl FitReport {
    pub fn flagged(&self) -> bool {
        self.excess_failures || self.point_outside
    }

    pub fn converged_draws(&self) -> impl Iterator<Item = &MaternFit> {
        self.draws.iter().flatten()
    }
}

/// Fits the point field and every draw, and summarises the per-draw
/// parameters by central quantile intervals at `level`.
pub fn range_uncertainty<D: AsRef<[f64]>>(
    draws: &[D],
    point_field: &[f64],
    lat: &Lattice,
    cfg: &VariogramConfig,
    transects: Option<&[usize]>,
    level: f64,
) -> Result<FitReport, VariogramError> {
    if draws.len() < MIN_UNCERTAINTY_DRAWS {
        return Err(VariogramError::TooFewDraws(draws.len()));
    }
    let point_bins = field_variogram(point_field, lat, &cfg.bins, transects)?;
    let extent = point_bins.domain_extent;
    let point = fit_matern(&point_bins, &cfg.fit)?;

    let mut fits = Vec::with_capacity(draws.len());
    for d in draws {
        let bins = field_variogram(d.as_ref(), lat, &cfg.bins, transects)?;
        let fit = match fit_matern(&bins, &cfg.fit) {
            Ok(f) if f.converged => Some(f),
            Ok(_) | Err(VariogramError::NonConvergence) => None,
            Err(e) => return Err(e),
        };
        fits.push(fit);
    }
    let ok: Vec<&MaternFit> = fits.iter().flatten().collect();
    let n_failed = fits.len() - ok.len();
    let excess_failures = n_failed as f64 > MAX_FAILED_FRACTION * fits.len() as f64;

    let intervals = if ok.len() >= 2 {
        let ci = |f: &dyn Fn(&MaternFit) -> f64| {
            central_interval(&ok.iter().map(|m| f(m)).collect::<Vec<_>>(), level)
        };
        Some(ParamIntervals {
            level,
            range: ci(&|m| m.params.range),
            partial_sill: ci(&|m| m.params.partial_sill),
            smoothness: ci(&|m| m.params.smoothness),
            effective_range: ci(&|m| m.effective_range.value.min(extent)),
        })
    } else {
        None
    };
    let point_outside = intervals.map_or(true, |iv| !iv.contains(&point, extent));
    Ok(FitReport {
        direction: cfg.bins.direction,
        point,
        draws: fits,
        intervals,
        n_failed,
        excess_failures,
        point_outside,
        extent,
    })
}
