use argmin::core::{CostFunction, Error as ArgminError, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use super::empirical::VariogramBins;
use super::matern::{EffectiveRange, MaternParams};
use super::VariogramError;

pub const DEFAULT_SMOOTHNESS_CAP: f64 = 5.0;
pub const MIN_FIT_BINS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub smoothness_cap: f64,
    /// Fit a nugget starting from 0; otherwise the nugget is fixed at 0.
    pub fit_nugget: bool,
    pub n_starts: usize,
    /// Nelder–Mead iterations per start.
    pub max_iters: u64,
    /// Standard deviation of simplex costs, relative to the weighted sum of
    /// squared semivariances, at which a start counts as converged.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            smoothness_cap: DEFAULT_SMOOTHNESS_CAP,
            fit_nugget: false,
            n_starts: 8,
            max_iters: 4000,
            tolerance: 1e-14,
        }
    }
}

impl FitConfig {
    pub fn with_cap(smoothness_cap: f64) -> Self {
        Self {
            smoothness_cap,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), VariogramError> {
        if !(self.smoothness_cap > 0.0 && self.smoothness_cap.is_finite())
            || self.n_starts == 0
            || self.max_iters == 0
            || !(self.tolerance >= 0.0)
        {
            return Err(VariogramError::InvalidFitConfig);
        }
        Ok(())
    }
}

/// Weighted least-squares Matérn fit to one set of bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaternFit {
    pub params: MaternParams,
    pub effective_range: EffectiveRange,
    pub weighted_sse: f64,
    pub converged: bool,
    pub cap_reached: bool,
}

struct Problem<'a> {
    lags: Vec<f64>,
    gammas: Vec<f64>,
    weights: Vec<f64>,
    sill_scale: f64,
    cfg: &'a FitConfig,
}

impl Problem<'_> {
    fn decode(&self, p: &[f64]) -> MaternParams {
        let nugget = if self.cfg.fit_nugget {
            p[3].max(0.0) * self.sill_scale
        } else {
            0.0
        };
        MaternParams {
            range: p[0].exp(),
            partial_sill: p[1].exp(),
            nugget,
            smoothness: p[2].exp().min(self.cfg.smoothness_cap),
        }
    }

    fn sse(&self, params: &MaternParams) -> f64 {
        self.lags
            .iter()
            .zip(&self.gammas)
            .zip(&self.weights)
            .map(|((&h, &g), &w)| {
                let r = g - params.semivariance(h);
                w * r * r
            })
            .sum()
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, ArgminError> {
        let params = self.decode(p);
        let c = self.sse(&params);
        Ok(if c.is_finite() { c } else { f64::MAX })
    }
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Starting points in the search coordinates. The first is the heuristic
/// start; the rest fill the log-parameter box with a Halton sequence.
fn starts(pb: &Problem, bins_max_lag: f64) -> Vec<Vec<f64>> {
    let sill = pb.sill_scale;
    let target = 0.63 * sill;
    let crossing = pb
        .lags
        .iter()
        .zip(&pb.gammas)
        .find(|(_, &g)| g >= target)
        .map_or(bins_max_lag, |(&h, _)| h);
    let cap = pb.cfg.smoothness_cap;
    let heuristic = vec![(crossing / 2.0).ln(), sill.ln(), 0.5f64.min(cap).ln(), 0.0];
    let h_min = pb.lags[0];
    let (r_lo, r_hi) = ((h_min / 4.0).ln(), (2.0 * bins_max_lag).ln());
    let (s_lo, s_hi) = ((0.5 * sill).ln(), (1.5 * sill).ln());
    let (n_lo, n_hi) = (0.2f64.min(cap / 2.0).ln(), cap.ln());
    let mut out = vec![heuristic];
    for i in 1..pb.cfg.n_starts {
        out.push(vec![
            r_lo + (r_hi - r_lo) * radical_inverse(i, 2),
            s_lo + (s_hi - s_lo) * radical_inverse(i, 3),
            n_lo + (n_hi - n_lo) * radical_inverse(i, 5),
            0.0,
        ]);
    }
    let dim = if pb.cfg.fit_nugget { 4 } else { 3 };
    for s in &mut out {
        s.truncate(dim);
    }
    out
}

fn simplex(x0: &[f64]) -> Vec<Vec<f64>> {
    let mut v = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut x = x0.to_vec();
        x[i] += if i == 3 { 0.05 } else { 0.4 };
        v.push(x);
    }
    v
}

fn run_nm(pb: &Problem, x0: &[f64], sd_tol: f64) -> Result<(Vec<f64>, f64, bool), VariogramError> {
    let solver = NelderMead::new(simplex(x0))
        .with_sd_tolerance(sd_tol)
        .map_err(|_| VariogramError::InvalidFitConfig)?;
    let res = Executor::new(
        Problem {
            lags: pb.lags.clone(),
            gammas: pb.gammas.clone(),
            weights: pb.weights.clone(),
            sill_scale: pb.sill_scale,
            cfg: pb.cfg,
        },
        solver,
    )
    .configure(|s| s.max_iters(pb.cfg.max_iters))
    .run()
    .map_err(|_| VariogramError::NonConvergence)?;
    let state = res.state();
    let converged = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
    );
    let best = state.get_best_param().cloned().ok_or(VariogramError::NonConvergence)?;
    Ok((best, state.get_best_cost(), converged))
}

/// Matérn fit by weighted least squares with weights `N/h²`, using multistart
/// Nelder–Mead followed by a polishing restart from the best start.
pub fn fit_matern(bins: &VariogramBins, cfg: &FitConfig) -> Result<MaternFit, VariogramError> {
    cfg.validate()?;
    let pts: Vec<(f64, f64, usize)> = bins
        .nonempty()
        .filter(|(h, g, _)| *h > 0.0 && h.is_finite() && g.is_finite())
        .collect();
    if pts.len() < MIN_FIT_BINS {
        return Err(VariogramError::TooFewBins(pts.len()));
    }
    let lags: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let gammas: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let raw: Vec<f64> = pts.iter().map(|p| p.2 as f64 / (p.0 * p.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let scale: f64 = weights.iter().zip(&gammas).map(|(w, g)| w * g * g).sum();
    let tail = (gammas.len() * 2 / 3).min(gammas.len() - 1);
    let sill_scale = {
        let s = gammas[tail..].iter().sum::<f64>() / (gammas.len() - tail) as f64;
        if s > 0.0 {
            s
        } else {
            gammas.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE)
        }
    };
    let pb = Problem {
        lags,
        gammas,
        weights,
        sill_scale,
        cfg,
    };
    let sd_tol = cfg.tolerance * scale.max(f64::MIN_POSITIVE);

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for x0 in starts(&pb, bins.max_lag()) {
        let Ok(r) = run_nm(&pb, &x0, sd_tol) else { continue };
        if best.as_ref().map_or(true, |b| r.1 < b.1) {
            best = Some(r);
        }
    }
    let (x, _, _) = best.ok_or(VariogramError::NonConvergence)?;
    let (x, cost, converged) = run_nm(&pb, &x, sd_tol)?;
    let params = pb.decode(&x);
    params.validate()?;
    let cost_raw = cost * total;
    Ok(MaternFit {
        effective_range: EffectiveRange::assess(params.effective_range(), bins.domain_extent),
        weighted_sse: cost_raw,
        converged: converged && cost_raw.is_finite(),
        cap_reached: params.smoothness >= cfg.smoothness_cap * (1.0 - 1e-9),
        params,
    })
}
