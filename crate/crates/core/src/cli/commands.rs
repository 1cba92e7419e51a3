use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, ScaleChoice, SetupKind};
use super::{CliError, Command};
use crate::diversity::{index_map, TraitStack};
use crate::illustration::{run_illustration, IllustrationReport};
use crate::io::{heatmap_ppm, read_draws, read_json, write_bytes, write_draws, write_json, write_records, Grid};
use crate::lattice::{build_regular_q, mask_q, Lattice, SelectionOperator};
use crate::sampler::{chain_diagnostics, gibbs_complete, gibbs_missing, posterior_mean, PosteriorChain};
use crate::scalespace::{
    credibility_map, most_prominent_minimum, scale_uncertainty, select_scales, Credibility, NormKind, ScaleSet,
    ScaleUncertainty, Smoother,
};
use crate::simulate::{SetupGenerator, SimulationSetup};
use crate::sparse::SparseMatrix;
use crate::variogram::{field_variogram, fit_matern, range_uncertainty, transect_subsample, Direction, VariogramBins};

#[derive(Default)]
pub(crate) struct Timings(Vec<(String, f64)>);

impl Timings {
    pub(crate) fn record(&mut self, stage: &str, since: Instant) {
        self.0.push((stage.to_string(), since.elapsed().as_secs_f64()));
    }

    /// Timings go to a text file so that the JSON and CSV artifacts stay
    /// byte-identical across reruns.
    pub(crate) fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text: String = self.0.iter().map(|(s, t)| format!("{s}\t{t:.3}s\n")).collect();
        std::fs::write(dir.join("timings.txt"), text).map_err(|e| CliError::Input(e.to_string()))
    }
}

pub(crate) fn dispatch(cmd: Command, cfg: &RunConfig, t: &mut Timings) -> Result<(), CliError> {
    let started = Instant::now();
    let name = match cmd {
        Command::Simulate => simulate(cfg).map(|_| "simulate"),
        Command::Resample => resample(cfg).map(|_| "resample"),
        Command::Scales => scales(cfg).map(|_| "scales"),
        Command::Decompose => decompose(cfg).map(|_| "decompose"),
        Command::Credibility => credibility(cfg).map(|_| "credibility"),
        Command::Variogram => variogram(cfg).map(|_| "variogram"),
        Command::Diversity => diversity(cfg).map(|_| "diversity"),
        Command::ReproduceIllustration => reproduce(cfg).map(|_| "reproduce-illustration"),
        Command::Heatmap => heatmap(cfg).map(|_| "heatmap"),
    }?;
    t.record(name, started);
    Ok(())
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    p.as_deref()
        .ok_or_else(|| CliError::Config(format!("input.{key} is required")))
}

/// Data grid and its lattice: `NA` cells unobserved, cells outside the
/// active mask inactive.
fn data_lattice(cfg: &RunConfig) -> Result<(Grid, Lattice), CliError> {
    let grid = Grid::read_csv(required(&cfg.input.data, "data")?)?;
    let active = match &cfg.lattice.active_mask {
        Some(p) => Some(read_json::<Vec<bool>>(p)?),
        None => None,
    };
    let lat = grid.lattice(active)?;
    Ok((grid, lat))
}

fn weights(lat: &Lattice, cfg: &RunConfig) -> Result<SparseMatrix, CliError> {
    let full = build_regular_q(lat, cfg.lattice.anisotropy).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(mask_q(&full, lat).map_err(|e| CliError::Input(e.to_string()))?.matrix)
}

#[derive(Debug, Serialize, Deserialize)]
struct ChainMeta {
    kappa_x: Vec<f64>,
    kappa_y: Vec<f64>,
    config: crate::sampler::ChainConfig,
    hyper: crate::sampler::HyperParams,
}

fn load_chain(cfg: &RunConfig, dim: usize) -> Result<Option<PosteriorChain>, CliError> {
    let Some(path) = &cfg.input.draws else { return Ok(None) };
    let draws = read_draws(path)?;
    if draws.first().is_some_and(|d| d.len() != dim) {
        return Err(CliError::Input(format!(
            "draws have {} columns, the lattice has {dim} active nodes",
            draws[0].len()
        )));
    }
    let meta = match &cfg.input.chain {
        Some(p) => read_json::<ChainMeta>(p)?,
        None => ChainMeta {
            kappa_x: vec![f64::NAN; draws.len()],
            kappa_y: vec![f64::NAN; draws.len()],
            config: cfg.chain.clone(),
            hyper: cfg.hyper,
        },
    };
    PosteriorChain::from_draws(draws, meta.kappa_x, meta.kappa_y, meta.config, meta.hyper)
        .map(Some)
        .map_err(|e| CliError::Input(e.to_string()))
}

fn complete_field(grid: &Grid, lat: &Lattice) -> Result<Vec<f64>, CliError> {
    let x = lat.from_grid(&grid.values);
    if lat.n_missing() > 0 {
        return Err(CliError::Input(
            "data has missing cells; resample it and pass the draws".into(),
        ));
    }
    Ok(x)
}

fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let s = &cfg.simulate;
    let base = match s.setup {
        SetupKind::Illustration => SimulationSetup::illustration(),
        SetupKind::LocalFeatures => SimulationSetup::local_features(),
        SetupKind::Anisotropic => SimulationSetup::anisotropic(),
    };
    let mut setup = SimulationSetup {
        noise_sd: s.noise_sd,
        missing_block: if s.missing_block { base.missing_block } else { None },
        ..base
    };
    if let Some([n1, n2]) = s.grid {
        if n1 < 2 || n2 < 2 {
            return Err(CliError::Config("simulate.grid needs at least 2×2 nodes".into()));
        }
        setup = setup.with_grid(n1, n2, 1.0 / n1.max(n2) as f64);
    }
    let data = SetupGenerator::new(setup.clone())
        .and_then(|g| g.generate(cfg.seed))
        .map_err(|e| CliError::stage("simulate", e))?;
    let grid = |values: Vec<f64>| Grid::new(setup.n1, setup.n2, setup.spacing, values);
    let mask = data.observed.observed_mask();
    let observed: Vec<f64> = data.y.iter().zip(mask).map(|(&v, &o)| if o { v } else { f64::NAN }).collect();
    grid(observed)?.write_csv(&out(cfg, "y.csv"))?;
    grid(data.y.clone())?.write_csv(&out(cfg, "y_complete.csv"))?;
    let truth: Vec<f64> = (0..data.y.len())
        .map(|i| data.components.iter().map(|c| c[i]).sum())
        .collect();
    grid(truth)?.write_csv(&out(cfg, "truth.csv"))?;
    for (k, c) in data.components.iter().enumerate() {
        grid(c.clone())?.write_csv(&out(cfg, &format!("component_{}.csv", k + 1)))?;
    }
    write_json(&out(cfg, "simulation.json"), &setup)?;
    info!("simulated {}×{} grid, seed {}", setup.n1, setup.n2, cfg.seed);
    Ok(())
}

fn resample(cfg: &RunConfig) -> Result<(), CliError> {
    let (_, lat) = data_lattice(cfg)?;
    let grid = Grid::read_csv(required(&cfg.input.data, "data")?)?;
    let q = weights(&lat, cfg)?;
    let values = lat.from_grid(&grid.values);
    let chain = if lat.n_missing() == 0 {
        gibbs_complete(&values, &q, &cfg.hyper, &cfg.chain)
    } else {
        let h = SelectionOperator::new(&lat);
        let y: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        gibbs_missing(&y, &q, &h, &cfg.hyper, &cfg.chain)
    }
    .map_err(|e| CliError::stage("resample", e))?;
    let mean = posterior_mean(&chain).map_err(|e| CliError::stage("resample", e))?;
    Grid::from_slots(&lat, &mean).write_csv(&out(cfg, "posterior_mean.csv"))?;
    Grid::from_slots(&lat, &chain.interval_widths(0.9)).write_csv(&out(cfg, "interval_width_90.csv"))?;
    let draws: Vec<&[f64]> = chain.draws().collect();
    write_draws(&out(cfg, "draws.csv"), &draws)?;
    write_json(
        &out(cfg, "chain.json"),
        &ChainMeta {
            kappa_x: chain.kappa_x().to_vec(),
            kappa_y: chain.kappa_y().to_vec(),
            config: chain.config().clone(),
            hyper: *chain.hyper(),
        },
    )?;
    write_json(&out(cfg, "diagnostics.json"), &chain_diagnostics(&chain))?;
    info!("resampled {} nodes ({} missing), {} draws", lat.n_active(), lat.n_missing(), chain.len());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ScalesFile {
    /// Scale set used by later stages.
    selected: ScaleSet,
    maximum: ScaleSet,
    euclidean: ScaleSet,
    uncertainty: Option<ScaleUncertainty>,
}

#[derive(Serialize)]
struct CurveRow {
    lambda: f64,
    euclidean: f64,
    maximum: f64,
}

/// Posterior mean of the draws when given, otherwise the complete data field.
fn analysis_field(cfg: &RunConfig, grid: &Grid, lat: &Lattice) -> Result<(Vec<f64>, Option<PosteriorChain>), CliError> {
    match load_chain(cfg, lat.n_active())? {
        Some(chain) => Ok((posterior_mean(&chain).map_err(|e| CliError::Input(e.to_string()))?, Some(chain))),
        None => Ok((complete_field(grid, lat)?, None)),
    }
}

fn compute_scales(cfg: &RunConfig, smoother: &Smoother, x: &[f64], chain: Option<&PosteriorChain>) -> Result<ScalesFile, CliError> {
    let sc = &cfg.scales;
    let stage = |e| CliError::stage("scales", e);
    let curves = smoother.norm_curves(x, &sc.grid).map_err(stage)?;
    let maximum = select_scales(&curves.maximum, &sc.grid, Some(NormKind::Maximum)).map_err(stage)?;
    let euclidean = select_scales(&curves.euclidean, &sc.grid, Some(NormKind::Euclidean)).map_err(stage)?;
    let selected = match sc.choice {
        ScaleChoice::AllMinima => match sc.norm {
            NormKind::Maximum => maximum.clone(),
            NormKind::Euclidean => euclidean.clone(),
        },
        ScaleChoice::MostProminent => {
            let lambdas = sc.grid.lambdas();
            let interior = most_prominent_minimum(curves.get(sc.norm)).map(|i| vec![lambdas[i]]).unwrap_or_default();
            ScaleSet::new(interior, Some(sc.norm)).map_err(stage)?
        }
    };
    let uncertainty = match chain {
        Some(c) => Some(scale_uncertainty(c, smoother, &sc.grid, sc.norm, sc.level).map_err(stage)?),
        None => None,
    };
    let rows: Vec<CurveRow> = (0..curves.lambdas.len())
        .map(|i| CurveRow {
            lambda: curves.lambdas[i],
            euclidean: curves.euclidean[i],
            maximum: curves.maximum[i],
        })
        .collect();
    write_records(&out(cfg, "norm_curves.csv"), &rows)?;
    Ok(ScalesFile {
        selected,
        maximum,
        euclidean,
        uncertainty,
    })
}

fn scales(cfg: &RunConfig) -> Result<(), CliError> {
    let (grid, lat) = data_lattice(cfg)?;
    let smoother = Smoother::new(&weights(&lat, cfg)?).map_err(|e| CliError::stage("scales", e))?;
    let (x, chain) = analysis_field(cfg, &grid, &lat)?;
    let file = compute_scales(cfg, &smoother, &x, chain.as_ref())?;
    info!(
        "maximum-norm minima {:?}, Euclidean minima {:?}",
        file.maximum.interior(),
        file.euclidean.interior()
    );
    write_json(&out(cfg, "scales.json"), &file)?;
    Ok(())
}

#[derive(Serialize)]
struct DecompositionSummary<'a> {
    scales: &'a ScaleSet,
    n_details: usize,
    additivity_error: f64,
}

fn decompose(cfg: &RunConfig) -> Result<(), CliError> {
    let (grid, lat) = data_lattice(cfg)?;
    let smoother = Smoother::new(&weights(&lat, cfg)?).map_err(|e| CliError::stage("decompose", e))?;
    let (x, chain) = analysis_field(cfg, &grid, &lat)?;
    let set = match &cfg.input.scales {
        Some(p) => read_json::<ScalesFile>(p)?.selected,
        None => compute_scales(cfg, &smoother, &x, None)?.selected,
    };
    let stage = |e| CliError::stage("decompose", e);
    let stack = match &chain {
        Some(c) => smoother.decompose_chain(c, &set).map_err(stage)?,
        None => smoother.decompose(&x, &set).map_err(stage)?,
    };
    for (l, z) in stack.details.iter().enumerate() {
        Grid::from_slots(&lat, z).write_csv(&out(cfg, &format!("detail_{}.csv", l + 1)))?;
        if let Some(draws) = stack.detail_draws(l) {
            write_draws(&out(cfg, &format!("detail_{}_draws.csv", l + 1)), &draws)?;
        }
    }
    let additivity_error = crate::scalespace::DetailStack::additivity_error(&stack.details, &x);
    write_json(
        &out(cfg, "decomposition.json"),
        &DecompositionSummary {
            scales: &set,
            n_details: stack.n_details(),
            additivity_error,
        },
    )?;
    info!("{} details at λ = {:?}", stack.n_details(), set.lambdas());
    Ok(())
}

#[derive(Serialize)]
struct CredibilityRecord {
    input: String,
    positive: usize,
    negative: usize,
    not_credible: usize,
}

fn credibility(cfg: &RunConfig) -> Result<(), CliError> {
    let (_, lat) = data_lattice(cfg)?;
    if cfg.input.detail_draws.is_empty() {
        return Err(CliError::Config("input.detail_draws is required".into()));
    }
    let mut records = Vec::new();
    for (k, path) in cfg.input.detail_draws.iter().enumerate() {
        let draws = read_draws(path)?;
        if draws.first().is_some_and(|d| d.len() != lat.n_active()) {
            return Err(CliError::Input(format!("{}: column count does not match the lattice", path.display())));
        }
        let map = credibility_map(&draws, cfg.credibility.level).map_err(|e| CliError::stage("credibility", e))?;
        let k = k + 1;
        Grid::from_slots(&lat, &map.codes()).write_csv(&out(cfg, &format!("credibility_{k}.csv")))?;
        Grid::from_slots(&lat, &map.prob_positive).write_csv(&out(cfg, &format!("prob_positive_{k}.csv")))?;
        Grid::from_slots(&lat, &map.prob_negative).write_csv(&out(cfg, &format!("prob_negative_{k}.csv")))?;
        records.push(CredibilityRecord {
            input: path.display().to_string(),
            positive: map.count(Credibility::CrediblyPositive),
            negative: map.count(Credibility::CrediblyNegative),
            not_credible: map.count(Credibility::NotCredible),
        });
    }
    write_json(&out(cfg, "credibility.json"), &records)?;
    Ok(())
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Omni => "omni",
        Direction::EastWest => "ew",
        Direction::NorthSouth => "ns",
    }
}

#[derive(Serialize)]
struct BinRow {
    lag: f64,
    semivariance: f64,
    pairs: usize,
}

#[derive(Serialize)]
struct FitRow {
    direction: &'static str,
    range: f64,
    partial_sill: f64,
    nugget: f64,
    smoothness: f64,
    smoothness_cap_reached: bool,
    effective_range: String,
    weighted_sse: f64,
    converged: bool,
    effective_range_lo: Option<f64>,
    effective_range_hi: Option<f64>,
}

fn write_bins(path: &Path, bins: &VariogramBins) -> Result<(), CliError> {
    let rows: Vec<BinRow> = bins
        .nonempty()
        .map(|(lag, semivariance, pairs)| BinRow { lag, semivariance, pairs })
        .collect();
    Ok(write_records(path, &rows)?)
}

fn variogram(cfg: &RunConfig) -> Result<(), CliError> {
    let v = &cfg.variogram;
    let stage = |e| CliError::stage("variogram", e);
    if let Some(path) = &cfg.input.bins {
        let bins: VariogramBins = read_json(path)?;
        let fit = fit_matern(&bins, &v.settings.fit).map_err(stage)?;
        info!("fitted {:?}", fit.params);
        write_json(&out(cfg, "fit.json"), &fit)?;
        return Ok(());
    }
    let grid = Grid::read_csv(required(&cfg.input.field, "field")?)?;
    let lat = grid.lattice(None)?;
    let field = lat.from_grid(&grid.values);
    let draws = match cfg.input.detail_draws.first() {
        Some(p) => Some(read_draws(p)?),
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for &direction in &v.directions {
        let mut settings = v.settings.clone();
        settings.bins.direction = direction;
        let transects = match (settings.transect_keep_one_of, direction) {
            (Some(k), Direction::EastWest | Direction::NorthSouth) => {
                Some(transect_subsample(&lat, direction, k, &mut rng).map_err(stage)?)
            }
            _ => None,
        };
        let name = direction_name(direction);
        let bins = field_variogram(&field, &lat, &settings.bins, transects.as_deref()).map_err(stage)?;
        write_bins(&out(cfg, &format!("bins_{name}.csv")), &bins)?;
        let (fit, iv) = match &draws {
            Some(d) => {
                let report = range_uncertainty(d, &field, &lat, &settings, transects.as_deref(), v.level).map_err(stage)?;
                write_json(&out(cfg, &format!("fit_{name}.json")), &report)?;
                (report.point.clone(), report.intervals.map(|i| i.effective_range))
            }
            None => {
                let fit = fit_matern(&bins, &settings.fit).map_err(stage)?;
                write_json(&out(cfg, &format!("fit_{name}.json")), &fit)?;
                (fit, None)
            }
        };
        rows.push(FitRow {
            direction: name,
            range: fit.params.range,
            partial_sill: fit.params.partial_sill,
            nugget: fit.params.nugget,
            smoothness: fit.params.smoothness,
            smoothness_cap_reached: fit.cap_reached,
            effective_range: fit.effective_range.display(),
            weighted_sse: fit.weighted_sse,
            converged: fit.converged,
            effective_range_lo: iv.map(|i| i.0),
            effective_range_hi: iv.map(|i| i.1),
        });
        info!("{name}: effective range {}", fit.effective_range.display());
    }
    write_records(&out(cfg, "fits.csv"), &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct DiversityRecord {
    file: String,
    index: &'static str,
    radius: f64,
    radius_grid_points: f64,
    flagged: usize,
}

fn diversity(cfg: &RunConfig) -> Result<(), CliError> {
    let grids: Vec<Grid> = cfg
        .input
        .traits
        .iter()
        .map(|p| Grid::read_csv(p))
        .collect::<Result<_, _>>()?;
    let first = grids
        .first()
        .ok_or_else(|| CliError::Config("input.traits is required".into()))?;
    if grids.iter().any(|g| (g.n1, g.n2) != (first.n1, first.n2)) {
        return Err(CliError::Input("trait grids differ in size".into()));
    }
    let all_finite: Vec<f64> = (0..first.values.len())
        .map(|i| if grids.iter().all(|g| g.values[i].is_finite()) { 0.0 } else { f64::NAN })
        .collect();
    let lat = Grid::new(first.n1, first.n2, first.spacing, all_finite)?.lattice(None)?;
    let traits = grids.iter().map(|g| lat.from_grid(&g.values)).collect();
    let stack = TraitStack::new(lat.clone(), traits).map_err(|e| CliError::Input(e.to_string()))?;
    let mut records = Vec::new();
    for (r, &radius) in cfg.diversity.radii.iter().enumerate() {
        for &index in &cfg.diversity.indices {
            let map = index_map(&stack, radius, index).map_err(|e| CliError::stage("diversity", e))?;
            let file = format!("{}_r{}.csv", index.name(), r + 1);
            Grid::from_slots(&lat, &map.values).write_csv(&out(cfg, &file))?;
            records.push(DiversityRecord {
                file,
                index: index.name(),
                radius,
                radius_grid_points: radius / lat.spacing(),
                flagged: map.n_flagged(),
            });
        }
    }
    write_json(&out(cfg, "diversity.json"), &records)?;
    Ok(())
}

fn heatmap(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.input.grids.is_empty() {
        return Err(CliError::Config("input.grids is required".into()));
    }
    for path in &cfg.input.grids {
        let grid = Grid::read_csv(path)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("grid");
        let bytes = heatmap_ppm(&grid, cfg.heatmap.palette, cfg.heatmap.cell_px);
        write_bytes(&out(cfg, &format!("{stem}.ppm")), &bytes)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub(crate) struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn in_band(v: f64, lo: f64, hi: f64) -> bool {
    v >= lo && v <= hi
}

/// Pass/fail summary against the reference targets.
fn illustration_checks(r: &IllustrationReport) -> Vec<Check> {
    let mut checks = Vec::new();
    let m = r.complete.maximum_minima();
    checks.push(Check {
        name: "single maximum-norm scale in [10, 60]",
        passed: m.len() == 1 && in_band(m[0], 10.0, 60.0),
        detail: format!("complete: maximum-norm minima {m:?}"),
    });
    checks.push(Check {
        name: "no Euclidean-norm scale",
        passed: r.complete.euclidean_minima.is_empty(),
        detail: format!("complete: Euclidean minima {:?}", r.complete.euclidean_minima),
    });
    for run in [&r.complete, &r.missing] {
        for (l, (lo, hi)) in [(0.03, 0.07), (0.56, 0.76)].into_iter().enumerate() {
            let e = run.fits.get(l).map_or(f64::NAN, |f| f.point.effective_range.value);
            checks.push(Check {
                name: if l == 0 { "z1 effective range in [0.03, 0.07]" } else { "z2 effective range in [0.56, 0.76]" },
                passed: in_band(e, lo, hi),
                detail: format!("{}: {e:.4}", run.kind.name()),
            });
        }
    }
    let width = |f: &crate::variogram::FitReport, which: usize| {
        f.intervals.map_or(f64::NAN, |i| {
            let (lo, hi) = if which == 0 { i.range } else { i.effective_range };
            hi - lo
        })
    };
    let wider = r.complete.fits.iter().zip(&r.missing.fits).all(|(c, m)| {
        width(m, 0) >= width(c, 0) && width(m, 1) >= width(c, 1)
    });
    checks.push(Check {
        name: "missing-data intervals at least as wide",
        passed: wider && r.complete.fits.len() == r.missing.fits.len() && !r.complete.fits.is_empty(),
        detail: format!("{} vs {} details", r.missing.fits.len(), r.complete.fits.len()),
    });
    let (miss, seen) = r.interval_width_medians();
    checks.push(Check {
        name: "missing-block interval width ≥ 1.2× observed",
        passed: miss >= 1.2 * seen,
        detail: format!("{miss:.4} vs {seen:.4}"),
    });
    checks
}

#[derive(Serialize)]
struct RunScales<'a> {
    data: &'static str,
    maximum_norm: &'a ScaleUncertainty,
    euclidean_minima: &'a [f64],
    decomposition: &'a ScaleSet,
}

fn reproduce(cfg: &RunConfig) -> Result<(), CliError> {
    let report = run_illustration(&cfg.illustration).map_err(|e| CliError::Stage {
        stage: e.stage(),
        message: e.to_string(),
    })?;
    write_records(&out(cfg, "table1.csv"), &report.table_rows())?;
    let scales: Vec<RunScales> = [&report.complete, &report.missing]
        .into_iter()
        .map(|run| RunScales {
            data: run.kind.name(),
            maximum_norm: &run.scales,
            euclidean_minima: &run.euclidean_minima,
            decomposition: &run.decomposition_scales,
        })
        .collect();
    write_json(&out(cfg, "scales.json"), &scales)?;
    for run in [&report.complete, &report.missing] {
        let k = run.kind.name();
        Grid::from_slots(&run.lattice, &run.posterior_mean).write_csv(&out(cfg, &format!("{k}_posterior_mean.csv")))?;
        Grid::from_slots(&run.lattice, &run.interval_widths).write_csv(&out(cfg, &format!("{k}_interval_width.csv")))?;
        for (l, z) in run.details.details.iter().enumerate() {
            Grid::from_slots(&run.lattice, z).write_csv(&out(cfg, &format!("{k}_detail_{}.csv", l + 1)))?;
        }
    }
    let checks = illustration_checks(&report);
    write_json(&out(cfg, "acceptance.json"), &checks)?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    for c in &checks {
        info!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(failed.join("; ")))
    }
}
