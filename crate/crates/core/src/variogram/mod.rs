//! Empirical semivariograms, Matérn model fitting and effective ranges.

mod empirical;
mod fit;
mod matern;
mod uncertainty;

pub use empirical::{empirical_variogram, transect_variogram, BinSpec, Direction, VariogramBins};
pub use fit::{fit_matern, FitConfig, MaternFit, DEFAULT_SMOOTHNESS_CAP, MIN_FIT_BINS};
pub use matern::{
    effective_range, matern_correlation, matern_semivariance, unit_effective_range,
    EffectiveRange, MaternParams, EFFECTIVE_RANGE_LEVEL,
};
pub use uncertainty::{
    field_variogram, range_uncertainty, transect_subsample, FitReport, ParamIntervals,
    VariogramConfig, MAX_FAILED_FRACTION, MIN_UNCERTAINTY_DRAWS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariogramError {
    #[error("invalid Matérn parameters {0:?}")]
    InvalidParams(MaternParams),
    #[error("field length {found} does not match {expected} active nodes")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("at least 2 valid nodes are required")]
    TooFewNodes,
    #[error("bin layout needs n_bins ≥ 1 and a maximum lag above the grid spacing")]
    InvalidBins,
    #[error("transect variograms need an E–W or N–S direction")]
    TransectNeedsAxis,
    #[error("transect {0} is out of range")]
    TransectOutOfRange(usize),
    #[error("fitting needs at least 4 nonempty bins (got {0})")]
    TooFewBins(usize),
    #[error("invalid fit configuration")]
    InvalidFitConfig,
    #[error("no start of the Matérn fit converged")]
    NonConvergence,
    #[error("uncertainty intervals need at least 20 draws (got {0})")]
    TooFewDraws(usize),
}
