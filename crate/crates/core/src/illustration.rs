//! End-to-end run on the two-field reference setup: simulate, resample with
//! and without a missing block, select scales, decompose, classify details
//! and fit Matérn variograms to each detail.

use log::info;
use serde::{Deserialize, Serialize};

use crate::lattice::{build_regular_q, AnisotropyWeights, Lattice, SelectionOperator};
use crate::sampler::{gibbs_complete, gibbs_missing, posterior_mean, ChainConfig, HyperParams, PosteriorChain};
use crate::scalespace::{
    credibility_map, most_prominent_minimum, scale_uncertainty, select_scales, Credibility, DetailStack, NormKind,
    ScaleGrid, ScaleSet, ScaleUncertainty, Smoother,
};
use crate::simulate::{SetupGenerator, SimulatedData, SimulationSetup};
use crate::stats::median;
use crate::variogram::{range_uncertainty, FitReport, VariogramConfig};

#[derive(Debug, thiserror::Error)]
pub enum IllustrationError {
    #[error("simulate: {0}")]
    Simulate(#[from] crate::simulate::SimulateError),
    #[error("lattice: {0}")]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error("resample: {0}")]
    Sampler(#[from] crate::sampler::SamplerError),
    #[error("scales: {0}")]
    Scalespace(#[from] crate::scalespace::ScalespaceError),
    #[error("variogram: {0}")]
    Variogram(#[from] crate::variogram::VariogramError),
}

impl IllustrationError {
    pub fn stage(&self) -> &'static str {
        match self {
            Self::Simulate(_) | Self::Lattice(_) => "simulate",
            Self::Sampler(_) => "resample",
            Self::Scalespace(_) => "scales",
            Self::Variogram(_) => "variogram",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IllustrationConfig {
    pub seed: u64,
    pub noise_sd: f64,
    pub hyper: HyperParams,
    pub chain: ChainConfig,
    pub grid: ScaleGrid,
    pub norm: NormKind,
    pub variogram: VariogramConfig,
    /// Level of the scale and variogram-parameter intervals.
    pub interval_level: f64,
    /// Level of the pointwise posterior intervals compared inside and
    /// outside the missing block.
    pub pointwise_level: f64,
    pub credibility_level: f64,
}

impl Default for IllustrationConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            noise_sd: crate::simulate::REFERENCE_NOISE_SD,
            hyper: HyperParams::default(),
            chain: ChainConfig {
                burn_in: 2000,
                n_samples: 200,
                ..ChainConfig::default()
            },
            grid: ScaleGrid::default(),
            norm: NormKind::Maximum,
            variogram: VariogramConfig::default(),
            interval_level: 0.95,
            pointwise_level: 0.9,
            credibility_level: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Complete,
    Missing,
}

impl DataKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Complete => "complete",
            Self::Missing => "missing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibilitySummary {
    pub positive: usize,
    pub negative: usize,
    pub not_credible: usize,
}

/// Everything derived from one resampled data set.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub kind: DataKind,
    pub lattice: Lattice,
    pub posterior_mean: Vec<f64>,
    /// Pointwise central-interval widths of the posterior draws.
    pub interval_widths: Vec<f64>,
    pub scales: ScaleUncertainty,
    /// Interior minima of the Euclidean curve of the posterior mean.
    pub euclidean_minima: Vec<f64>,
    /// Scales used for the decomposition: the most prominent minimum of the
    /// chosen norm.
    pub decomposition_scales: ScaleSet,
    pub details: DetailStack,
    pub credibility: Vec<CredibilitySummary>,
    /// One report per non-mean detail.
    pub fits: Vec<FitReport>,
}

impl RunSummary {
    pub fn maximum_minima(&self) -> &[f64] {
        self.scales.reference.interior()
    }
}

#[derive(Debug, Clone)]
pub struct IllustrationReport {
    pub config: IllustrationConfig,
    pub data: SimulatedData,
    pub complete: RunSummary,
    pub missing: RunSummary,
}

impl IllustrationReport {
    /// Median pointwise interval width over missing nodes and over observed
    /// nodes of the missing-data run.
    pub fn interval_width_medians(&self) -> (f64, f64) {
        let obs = self.missing.lattice.observed_slots();
        let (mut miss, mut seen) = (Vec::new(), Vec::new());
        for (w, o) in self.missing.interval_widths.iter().zip(obs) {
            if o { seen.push(*w) } else { miss.push(*w) }
        }
        (median(&miss), median(&seen))
    }

    /// Rows shaped like a detail-by-parameter table.
    pub fn table_rows(&self) -> Vec<TableRow> {
        [&self.complete, &self.missing]
            .into_iter()
            .flat_map(|run| {
                run.fits.iter().enumerate().map(move |(l, f)| TableRow::new(run.kind, l + 1, f))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub data: DataKind,
    pub detail: usize,
    pub range: f64,
    pub range_lo: f64,
    pub range_hi: f64,
    pub partial_sill: f64,
    pub partial_sill_lo: f64,
    pub partial_sill_hi: f64,
    pub smoothness: f64,
    pub smoothness_lo: f64,
    pub smoothness_hi: f64,
    pub smoothness_cap_reached: bool,
    pub effective_range: f64,
    pub effective_range_lo: f64,
    pub effective_range_hi: f64,
    pub censored: bool,
    pub flagged: bool,
}

impl TableRow {
    fn new(data: DataKind, detail: usize, f: &FitReport) -> Self {
        let nan = (f64::NAN, f64::NAN);
        let iv = f.intervals;
        let p = &f.point.params;
        let (r, s, n, e) = iv.map_or((nan, nan, nan, nan), |iv| {
            (iv.range, iv.partial_sill, iv.smoothness, iv.effective_range)
        });
        Self {
            data,
            detail,
            range: p.range,
            range_lo: r.0,
            range_hi: r.1,
            partial_sill: p.partial_sill,
            partial_sill_lo: s.0,
            partial_sill_hi: s.1,
            smoothness: p.smoothness,
            smoothness_lo: n.0,
            smoothness_hi: n.1,
            smoothness_cap_reached: f.point.cap_reached,
            effective_range: f.point.effective_range.value,
            effective_range_lo: e.0,
            effective_range_hi: e.1,
            censored: f.point.effective_range.censored,
            flagged: f.flagged(),
        }
    }
}

/// Scale selection, decomposition, credibility and variogram fits for one
/// posterior chain.
pub fn summarise_chain(
    kind: DataKind,
    lat: &Lattice,
    smoother: &Smoother,
    chain: &PosteriorChain,
    cfg: &IllustrationConfig,
) -> Result<RunSummary, IllustrationError> {
    let mean = posterior_mean(chain)?;
    let scales = scale_uncertainty(chain, smoother, &cfg.grid, cfg.norm, cfg.interval_level)?;
    let curves = smoother.norm_curves(&mean, &cfg.grid)?;
    let euclidean_minima = select_scales(curves.get(NormKind::Euclidean), &cfg.grid, None)?
        .interior()
        .to_vec();
    let lambdas = cfg.grid.lambdas();
    let chosen: Vec<f64> = most_prominent_minimum(curves.get(cfg.norm))
        .map(|i| vec![lambdas[i]])
        .unwrap_or_default();
    let decomposition_scales = ScaleSet::new(chosen, Some(cfg.norm))?;
    info!(
        "{}: {:?} minima {:?}, Euclidean minima {:?}, decomposing at {:?}",
        kind.name(),
        cfg.norm,
        scales.reference.interior(),
        euclidean_minima,
        decomposition_scales.interior()
    );
    let details = smoother.decompose_chain(chain, &decomposition_scales)?;

    let mut credibility = Vec::new();
    let mut fits = Vec::new();
    for l in 0..details.n_details() - 1 {
        let draws = details.detail_draws(l).expect("chain decomposition keeps draws");
        let map = credibility_map(&draws, cfg.credibility_level)?;
        credibility.push(CredibilitySummary {
            positive: map.count(Credibility::CrediblyPositive),
            negative: map.count(Credibility::CrediblyNegative),
            not_credible: map.count(Credibility::NotCredible),
        });
        let report = range_uncertainty(&draws, &details.details[l], lat, &cfg.variogram, None, cfg.interval_level)?;
        info!(
            "{} z{}: effective range {:.4} ({:?})",
            kind.name(),
            l + 1,
            report.point.effective_range.value,
            report.intervals.map(|i| i.effective_range)
        );
        fits.push(report);
    }
    Ok(RunSummary {
        kind,
        lattice: lat.clone(),
        posterior_mean: mean,
        interval_widths: chain.interval_widths(cfg.pointwise_level),
        scales,
        euclidean_minima,
        decomposition_scales,
        details,
        credibility,
        fits,
    })
}

pub fn run_illustration(cfg: &IllustrationConfig) -> Result<IllustrationReport, IllustrationError> {
    let setup = SimulationSetup {
        noise_sd: cfg.noise_sd,
        ..SimulationSetup::illustration()
    };
    let data = SetupGenerator::new(setup)?.generate(cfg.seed)?;
    info!("simulated seed {}", cfg.seed);
    let q = build_regular_q(&data.complete, AnisotropyWeights::isotropic())?;
    let smoother = Smoother::new(&q)?;
    let chain_cfg = ChainConfig {
        seed: cfg.seed,
        ..cfg.chain.clone()
    };

    let complete_chain = gibbs_complete(&data.y, &q, &cfg.hyper, &chain_cfg)?;
    info!("complete-data chain: {} draws", complete_chain.len());
    let complete = summarise_chain(DataKind::Complete, &data.complete, &smoother, &complete_chain, cfg)?;
    drop(complete_chain);

    let h = SelectionOperator::new(&data.observed);
    let missing_chain = gibbs_missing(&data.observed_values(), &q, &h, &cfg.hyper, &chain_cfg)?;
    info!("missing-data chain: {} draws", missing_chain.len());
    let missing = summarise_chain(DataKind::Missing, &data.observed, &smoother, &missing_chain, cfg)?;

    Ok(IllustrationReport {
        config: cfg.clone(),
        data,
        complete,
        missing,
    })
}
