use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diversity::DiversityIndex;
use crate::illustration::IllustrationConfig;
use crate::io::Palette;
use crate::lattice::AnisotropyWeights;
use crate::sampler::{ChainConfig, HyperParams};
use crate::scalespace::{NormKind, ScaleGrid};
use crate::variogram::{Direction, VariogramConfig};

/// TOML run configuration; every section is optional and unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub input: InputConfig,
    pub lattice: LatticeConfig,
    pub hyper: HyperParams,
    pub chain: ChainConfig,
    pub scales: ScalesConfig,
    pub variogram: VariogramRunConfig,
    pub credibility: CredibilityConfig,
    pub diversity: DiversityConfig,
    pub simulate: SimulateConfig,
    pub heatmap: HeatmapConfig,
    pub illustration: IllustrationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: PathBuf::from("out"),
            input: InputConfig::default(),
            lattice: LatticeConfig::default(),
            hyper: HyperParams::default(),
            chain: ChainConfig::default(),
            scales: ScalesConfig::default(),
            variogram: VariogramRunConfig::default(),
            credibility: CredibilityConfig::default(),
            diversity: DiversityConfig::default(),
            simulate: SimulateConfig::default(),
            heatmap: HeatmapConfig::default(),
            illustration: IllustrationConfig::default(),
        }
    }
}

impl RunConfig {
    /// Rebases relative input paths on `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        let i = &mut self.input;
        for p in [&mut i.data, &mut i.draws, &mut i.chain, &mut i.scales, &mut i.field, &mut i.bins]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        for p in i.detail_draws.iter_mut().chain(&mut i.traits).chain(&mut i.grids) {
            fix(p);
        }
        if let Some(p) = self.lattice.active_mask.as_mut() {
            fix(p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputConfig {
    /// Observed data grid; `NA` cells are missing.
    pub data: Option<PathBuf>,
    /// Posterior draw matrix, one row per draw.
    pub draws: Option<PathBuf>,
    /// Chain metadata written next to the draws.
    pub chain: Option<PathBuf>,
    /// Scale set JSON.
    pub scales: Option<PathBuf>,
    /// Draw matrices of individual details.
    pub detail_draws: Vec<PathBuf>,
    /// Single field grid for variogram estimation.
    pub field: Option<PathBuf>,
    /// Pre-computed bins for a fit-only variogram run.
    pub bins: Option<PathBuf>,
    /// Trait grids for diversity maps.
    pub traits: Vec<PathBuf>,
    /// Grids to render as heatmaps.
    pub grids: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub anisotropy: AnisotropyWeights,
    /// JSON array of booleans over the full grid, row-major.
    pub active_mask: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleChoice {
    /// Every interior minimum.
    #[default]
    AllMinima,
    /// The single most prominent minimum.
    MostProminent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalesConfig {
    pub grid: ScaleGrid,
    pub norm: NormKind,
    pub choice: ScaleChoice,
    pub level: f64,
}

impl Default for ScalesConfig {
    fn default() -> Self {
        Self {
            grid: ScaleGrid::default(),
            norm: NormKind::Maximum,
            choice: ScaleChoice::AllMinima,
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariogramRunConfig {
    pub directions: Vec<Direction>,
    pub settings: VariogramConfig,
    pub level: f64,
}

impl Default for VariogramRunConfig {
    fn default() -> Self {
        Self {
            directions: vec![Direction::Omni],
            settings: VariogramConfig::default(),
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CredibilityConfig {
    pub level: f64,
}

impl Default for CredibilityConfig {
    fn default() -> Self {
        Self { level: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiversityConfig {
    /// Window radii in distance units.
    pub radii: Vec<f64>,
    pub indices: Vec<DiversityIndex>,
}

impl Default for DiversityConfig {
    fn default() -> Self {
        Self {
            radii: vec![1.0],
            indices: vec![DiversityIndex::FRich, DiversityIndex::FDiv, DiversityIndex::FEve],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetupKind {
    #[default]
    Illustration,
    LocalFeatures,
    Anisotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub setup: SetupKind,
    pub noise_sd: f64,
    /// Lays the setup's missing block onto the data.
    pub missing_block: bool,
    /// Grid size `[n1, n2]` over the unit square instead of the 100×100 default.
    pub grid: Option<[usize; 2]>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            setup: SetupKind::Illustration,
            noise_sd: crate::simulate::REFERENCE_NOISE_SD,
            missing_block: true,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatmapConfig {
    pub palette: Palette,
    pub cell_px: usize,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self {
            palette: Palette::Gray,
            cell_px: 4,
        }
    }
}
