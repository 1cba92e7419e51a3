use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{compose, insert_missing_block, FieldSpec, GrfSampler, Region, SimulateError};
use crate::lattice::Lattice;
use crate::variogram::MaternParams;

/// Rectangular block of grid nodes, `top_left = (row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub top_left: (usize, usize),
    pub size: (usize, usize),
}

/// Additive composition of Matérn fields plus white noise on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSetup {
    pub n1: usize,
    pub n2: usize,
    pub spacing: f64,
    pub fields: Vec<FieldSpec>,
    pub noise_sd: f64,
    #[serde(default)]
    pub missing_block: Option<Block>,
}

/// White-noise standard deviation used by the reference setups.
pub const REFERENCE_NOISE_SD: f64 = 0.2;

fn matern(range: f64, smoothness: f64) -> MaternParams {
    MaternParams {
        range,
        partial_sill: 1.0,
        nugget: 0.0,
        smoothness,
    }
}

impl SimulationSetup {
    /// Two isotropic fields with effective ranges 0.06 and 0.62 on a 100×100
    /// grid over the unit square, with a central 15×15 missing block.
    pub fn illustration() -> Self {
        Self {
            n1: 100,
            n2: 100,
            spacing: 0.01,
            fields: vec![
                FieldSpec::isotropic(matern(0.02, 0.5)),
                FieldSpec::isotropic(matern(0.12, 1.8)),
            ],
            noise_sd: REFERENCE_NOISE_SD,
            missing_block: Some(Block {
                top_left: (43, 43),
                size: (15, 15),
            }),
        }
    }

    /// Small-scale field in the lower half, medium-scale field in the upper
    /// half, and a large-scale field everywhere (effective ranges 0.03, 0.21
    /// and 0.62).
    pub fn local_features() -> Self {
        Self {
            fields: vec![
                FieldSpec::isotropic(matern(0.01, 0.5)).with_region(Region::LowerHalf),
                FieldSpec::isotropic(matern(0.08, 0.35)).with_region(Region::UpperHalf),
                FieldSpec::isotropic(matern(0.12, 1.8)),
            ],
            missing_block: None,
            ..Self::illustration()
        }
    }

    /// The illustration fields with E–W distances doubled, so that features
    /// are twice as long N–S as E–W.
    pub fn anisotropic() -> Self {
        let base = Self::illustration();
        Self {
            fields: base.fields.iter().map(|f| f.with_scale(2.0, 1.0)).collect(),
            missing_block: None,
            ..base
        }
    }

    /// Changes the grid; a missing block keeps its relative position and size.
    pub fn with_grid(mut self, n1: usize, n2: usize, spacing: f64) -> Self {
        if let Some(b) = self.missing_block.as_mut() {
            let rescale = |v: usize, old: usize, new: usize| (v * new + old / 2) / old;
            let size = (
                rescale(b.size.0, self.n1, n1).clamp(1, n1),
                rescale(b.size.1, self.n2, n2).clamp(1, n2),
            );
            let top_left = (
                rescale(b.top_left.0, self.n1, n1).min(n1 - size.0),
                rescale(b.top_left.1, self.n2, n2).min(n2 - size.1),
            );
            *b = Block { top_left, size };
        }
        self.n1 = n1;
        self.n2 = n2;
        self.spacing = spacing;
        self
    }

    pub fn lattice(&self) -> Result<Lattice, SimulateError> {
        Ok(Lattice::full(self.n1, self.n2, self.spacing)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    /// Fully observed lattice.
    pub complete: Lattice,
    /// Lattice with the setup's missing block cleared (equal to `complete`
    /// without one).
    pub observed: Lattice,
    /// Individual fields, row-major over the full grid.
    pub components: Vec<Vec<f64>>,
    /// Noisy sum over the full grid.
    pub y: Vec<f64>,
    pub seed: u64,
}

impl SimulatedData {
    /// Observed values in slot order of the `observed` lattice.
    pub fn observed_values(&self) -> Vec<f64> {
        let mask = self.observed.observed_mask();
        self.y
            .iter()
            .zip(mask)
            .filter_map(|(&v, &o)| o.then_some(v))
            .collect()
    }
}

/// Holds the factorized covariances of a setup so replicates only cost the
/// triangular products.
#[derive(Debug, Clone)]
pub struct SetupGenerator {
    setup: SimulationSetup,
    lattice: Lattice,
    samplers: Vec<GrfSampler>,
}

impl SetupGenerator {
    pub fn new(setup: SimulationSetup) -> Result<Self, SimulateError> {
        let lattice = setup.lattice()?;
        let samplers = setup
            .fields
            .iter()
            .map(|f| GrfSampler::new(f, &lattice))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            setup,
            lattice,
            samplers,
        })
    }

    pub fn setup(&self) -> &SimulationSetup {
        &self.setup
    }

    pub fn generate(&self, seed: u64) -> Result<SimulatedData, SimulateError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let components: Vec<Vec<f64>> = self.samplers.iter().map(|s| s.sample(&mut rng)).collect();
        let y = compose(&components, self.setup.noise_sd, &mut rng)?;
        let observed = match self.setup.missing_block {
            Some(b) => insert_missing_block(&self.lattice, b.top_left, b.size)?,
            None => self.lattice.clone(),
        };
        Ok(SimulatedData {
            complete: self.lattice.clone(),
            observed,
            components,
            y,
            seed,
        })
    }
}
