use serde::{Deserialize, Serialize};

use super::PosteriorChain;

pub const ACF_MAX_LAG: usize = 20;
const MAX_PROBES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// Autocorrelation at lags 1..=20 (fewer on short chains); `None` for a
    /// constant series.
    pub acf: Option<Vec<f64>>,
    pub ess: Option<f64>,
    pub degenerate: bool,
    pub trace: Vec<f64>,
}

impl ParamDiagnostics {
    pub fn from_series(name: impl Into<String>, series: &[f64]) -> Self {
        let n = series.len() as f64;
        let mean = series.iter().sum::<f64>() / n;
        let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let degenerate = is_constant(series);
        let max_lag = ACF_MAX_LAG.min(series.len().saturating_sub(1));
        Self {
            name: name.into(),
            mean,
            sd: var.sqrt(),
            acf: (!degenerate).then(|| autocorrelation(series, max_lag)[1..].to_vec()),
            ess: effective_sample_size(series),
            degenerate,
            trace: series.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub n_samples: usize,
    pub probe_nodes: Vec<usize>,
    pub params: Vec<ParamDiagnostics>,
}

fn is_constant(series: &[f64]) -> bool {
    series.windows(2).all(|w| w[0] == w[1])
}

/// Sample autocorrelation at lags `0..=max_lag` (lag 0 is 1).
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| {
            if c0 == 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            c.iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / c0
        })
        .collect()
}

/// Effective sample size from Geyer's initial monotone positive sequence.
/// `None` for series shorter than 4 or without variation.
pub fn effective_sample_size(series: &[f64]) -> Option<f64> {
    let n = series.len();
    if n < 4 || is_constant(series) {
        return None;
    }
    let rho = autocorrelation(series, n - 1);
    let mut tau = -1.0;
    let mut prev = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < rho.len() {
        let pair = (rho[2 * m] + rho[2 * m + 1]).min(prev);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        prev = pair;
        m += 1;
    }
    Some(n as f64 / tau.max(1.0 / n as f64))
}

/// Up to 20 evenly spread node indices.
pub fn probe_nodes(dim: usize) -> Vec<usize> {
    if dim <= MAX_PROBES {
        return (0..dim).collect();
    }
    (0..MAX_PROBES)
        .map(|k| ((2 * k + 1) * dim) / (2 * MAX_PROBES))
        .collect()
}

pub fn chain_diagnostics(chain: &PosteriorChain) -> DiagnosticsReport {
    let probes = probe_nodes(chain.dim());
    let mut params = vec![
        ParamDiagnostics::from_series("kappa_x", chain.kappa_x()),
        ParamDiagnostics::from_series("kappa_y", chain.kappa_y()),
    ];
    for &p in &probes {
        params.push(ParamDiagnostics::from_series(format!("x[{p}]"), &chain.node_trace(p)));
    }
    DiagnosticsReport {
        n_samples: chain.len(),
        probe_nodes: probes,
        params,
    }
}
