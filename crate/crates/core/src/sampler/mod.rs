//! Gibbs sampler for the normal-gamma hierarchical model with an IGMRF prior
//! on the latent field.
//!
//! Model: `y | x, κ_y ~ N(Hx, κ_y⁻¹ I)`, `x | κ_x ∝ exp(−κ_x xᵀQx / 2)`,
//! `κ_x ~ Gamma(α_x, β_x)`, `κ_y ~ Gamma(α_y, β_y)` (shape, rate).

mod diagnostics;
mod gibbs;

pub use diagnostics::{
    autocorrelation, chain_diagnostics, effective_sample_size, probe_nodes, DiagnosticsReport,
    ParamDiagnostics, ACF_MAX_LAG,
};
pub use gibbs::{conditional_mean, gibbs_complete, gibbs_missing, initial_field};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::SparseError;
use crate::stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("hyperparameters must be positive and finite")]
    InvalidHyperParams,
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("non-finite value in the data at position {0}")]
    NonFiniteInput(usize),
    #[error("data length {found} does not match the {expected} expected values")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the complete-data sampler needs every node observed; use the missing-data sampler")]
    HasMissing,
    #[error("at least two observations are required")]
    TooFewObservations,
    #[error("posterior chain is empty")]
    EmptyChain,
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Gamma shape/rate hyperparameters of the two precision priors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParams {
    pub alpha_x: f64,
    pub beta_x: f64,
    pub alpha_y: f64,
    pub beta_y: f64,
}

impl HyperParams {
    pub fn new(alpha_x: f64, beta_x: f64, alpha_y: f64, beta_y: f64) -> Result<Self, SamplerError> {
        let hp = Self {
            alpha_x,
            beta_x,
            alpha_y,
            beta_y,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let all = [self.alpha_x, self.beta_x, self.alpha_y, self.beta_y];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(SamplerError::InvalidHyperParams)
        }
    }
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            alpha_x: 1.0,
            beta_x: 0.1,
            alpha_y: 10.0,
            beta_y: 1.0,
        }
    }
}

/// How the recorded initial state fills nodes without an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitFill {
    ObservedWithZeroFill,
    #[default]
    NeighborMeanFill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub n_samples: usize,
    pub thin: usize,
    pub seed: u64,
    pub init_kappa_x: f64,
    pub init_kappa_y: f64,
    pub init_x: InitFill,
    /// Keep both precisions at their initial values (conditional sampling of
    /// `x` only).
    pub fixed_kappa: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            burn_in: 10_000,
            n_samples: 1_000,
            thin: 1,
            seed: 1,
            init_kappa_x: 1.0,
            init_kappa_y: 1.0,
            init_x: InitFill::default(),
            fixed_kappa: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.n_samples == 0 {
            return Err(SamplerError::InvalidConfig("n_samples must be at least 1"));
        }
        if self.thin == 0 {
            return Err(SamplerError::InvalidConfig("thin must be at least 1"));
        }
        for k in [self.init_kappa_x, self.init_kappa_y] {
            if !(k.is_finite() && k > 0.0) {
                return Err(SamplerError::InvalidConfig("initial precisions must be positive"));
            }
        }
        Ok(())
    }
}

/// Stored post-burn-in draws. `x` draws are kept row-major, one draw per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    dim: usize,
    x_draws: Vec<f64>,
    kappa_x: Vec<f64>,
    kappa_y: Vec<f64>,
    initial_x: Vec<f64>,
    config: ChainConfig,
    hyper: HyperParams,
}

impl PosteriorChain {
    /// Assembles a chain from externally produced draws.
    pub fn from_draws(
        x_draws: Vec<Vec<f64>>,
        kappa_x: Vec<f64>,
        kappa_y: Vec<f64>,
        config: ChainConfig,
        hyper: HyperParams,
    ) -> Result<Self, SamplerError> {
        let dim = x_draws.first().map_or(0, Vec::len);
        if x_draws.iter().any(|d| d.len() != dim) {
            return Err(SamplerError::DimensionMismatch {
                expected: dim,
                found: x_draws.iter().map(Vec::len).find(|&l| l != dim).unwrap(),
            });
        }
        for k in [&kappa_x, &kappa_y] {
            if k.len() != x_draws.len() {
                return Err(SamplerError::DimensionMismatch {
                    expected: x_draws.len(),
                    found: k.len(),
                });
            }
        }
        let initial_x = x_draws.first().cloned().unwrap_or_default();
        Ok(Self {
            dim,
            x_draws: x_draws.concat(),
            kappa_x,
            kappa_y,
            initial_x,
            config,
            hyper,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.kappa_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa_x.is_empty()
    }

    pub fn draw(&self, s: usize) -> &[f64] {
        &self.x_draws[s * self.dim..(s + 1) * self.dim]
    }

    pub fn draws(&self) -> impl Iterator<Item = &[f64]> {
        self.x_draws.chunks_exact(self.dim.max(1))
    }

    pub fn kappa_x(&self) -> &[f64] {
        &self.kappa_x
    }

    pub fn kappa_y(&self) -> &[f64] {
        &self.kappa_y
    }

    /// State before the first update; it does not influence the draws because
    /// the field is updated first.
    pub fn initial_x(&self) -> &[f64] {
        &self.initial_x
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    /// Draws of a single node across the chain.
    pub fn node_trace(&self, node: usize) -> Vec<f64> {
        self.draws().map(|d| d[node]).collect()
    }

    /// Pointwise central posterior interval width at every node.
    pub fn interval_widths(&self, level: f64) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let (lo, hi) = stats::central_interval(&self.node_trace(i), level);
                hi - lo
            })
            .collect()
    }
}

/// Arithmetic mean of the `x` draws.
pub fn posterior_mean(chain: &PosteriorChain) -> Result<Vec<f64>, SamplerError> {
    if chain.is_empty() {
        return Err(SamplerError::EmptyChain);
    }
    let mut mean = vec![0.0; chain.dim()];
    for d in chain.draws() {
        for (m, v) in mean.iter_mut().zip(d) {
            *m += v;
        }
    }
    let s = chain.len() as f64;
    mean.iter_mut().for_each(|m| *m /= s);
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_of(draws: Vec<Vec<f64>>) -> PosteriorChain {
        let k = vec![1.0; draws.len()];
        PosteriorChain::from_draws(draws, k.clone(), k, ChainConfig::default(), HyperParams::default())
            .unwrap()
    }

    #[test]
    fn mean_of_single_draw_is_the_draw() {
        let c = chain_of(vec![vec![1.5, -2.0, 3.25]]);
        assert_eq!(posterior_mean(&c).unwrap(), vec![1.5, -2.0, 3.25]);
    }

    #[test]
    fn mean_of_opposite_draws_is_zero() {
        let v = vec![0.3, -1.7, 4.0];
        let w: Vec<f64> = v.iter().map(|a| -a).collect();
        let c = chain_of(vec![v, w]);
        assert!(posterior_mean(&c).unwrap().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn empty_chain_is_an_error() {
        let c = PosteriorChain::from_draws(
            vec![],
            vec![],
            vec![],
            ChainConfig::default(),
            HyperParams::default(),
        )
        .unwrap();
        assert_eq!(posterior_mean(&c), Err(SamplerError::EmptyChain));
    }

    #[test]
    fn hyperparameters_must_be_positive() {
        assert!(HyperParams::new(1.0, 0.1, 10.0, 1.0).is_ok());
        assert!(HyperParams::new(0.0, 0.1, 10.0, 1.0).is_err());
        assert!(HyperParams::new(1.0, f64::NAN, 10.0, 1.0).is_err());
    }
}
