use serde::{Deserialize, Serialize};

use super::VariogramError;
use crate::lattice::Lattice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    Omni,
    /// Along grid rows.
    EastWest,
    /// Along grid columns.
    NorthSouth,
}

/// Pair-selection settings for the Matheron estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BinSpec {
    pub direction: Direction,
    pub n_bins: usize,
    /// Largest lag in distance units; one third of the domain diagonal when
    /// absent.
    pub max_lag: Option<f64>,
    /// Half-width of the directional cone in degrees.
    pub angle_tolerance: f64,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self {
            direction: Direction::Omni,
            n_bins: 15,
            max_lag: None,
            angle_tolerance: 22.5,
        }
    }
}

impl BinSpec {
    pub fn directional(direction: Direction) -> Self {
        Self {
            direction,
            ..Self::default()
        }
    }

    pub fn resolved_max_lag(&self, lat: &Lattice) -> f64 {
        self.max_lag.unwrap_or_else(|| domain_diagonal(lat) / 3.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariogramBins {
    /// Mean pair distance per bin (`NaN` for empty bins, `null` in JSON).
    #[serde(with = "nan_as_null")]
    pub lag_centers: Vec<f64>,
    /// `γ̂ = Σ(Z_i − Z_j)² / (2N)` per bin (`NaN` for empty bins).
    #[serde(with = "nan_as_null")]
    pub semivariances: Vec<f64>,
    pub pair_counts: Vec<usize>,
    /// Bin `b` covers lags in `(b·w, (b+1)·w]`.
    pub bin_width: f64,
    pub direction: Direction,
    pub angle_tolerance: f64,
    /// Diagonal of the sampled domain; effective ranges beyond it are
    /// censored. Unbounded extents are written as `null`.
    #[serde(with = "unbounded", default = "infinite")]
    pub domain_extent: f64,
}

fn infinite() -> f64 {
    f64::INFINITY
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.is_finite().then_some(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(d)?.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
    }
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl VariogramBins {
    /// Builds bins directly from lags and semivariances, typically for
    /// synthetic fits. Every bin gets `pair_count` pairs.
    pub fn from_points(lags: &[f64], semivariances: &[f64], pair_count: usize) -> Self {
        let max = lags.iter().fold(0.0f64, |m, &l| m.max(l));
        Self {
            lag_centers: lags.to_vec(),
            semivariances: semivariances.to_vec(),
            pair_counts: vec![pair_count; lags.len()],
            bin_width: max / lags.len().max(1) as f64,
            direction: Direction::Omni,
            angle_tolerance: 90.0,
            domain_extent: f64::INFINITY,
        }
    }

    /// `(lag, γ̂, N)` for non-empty bins.
    pub fn nonempty(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        (0..self.pair_counts.len())
            .filter(|&b| self.pair_counts[b] > 0)
            .map(|b| (self.lag_centers[b], self.semivariances[b], self.pair_counts[b]))
    }

    pub fn n_nonempty(&self) -> usize {
        self.pair_counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn max_lag(&self) -> f64 {
        self.bin_width * self.pair_counts.len() as f64
    }
}

/// Grid-lag vector `(dr, dc)` accepted by the direction cone.
pub(crate) fn accepts(direction: Direction, dr: isize, dc: isize, tol_deg: f64) -> bool {
    let (a, b) = (dr.unsigned_abs() as f64, dc.unsigned_abs() as f64);
    let tol = tol_deg.to_radians() + 1e-12;
    match direction {
        Direction::Omni => true,
        Direction::EastWest => a.atan2(b) <= tol,
        Direction::NorthSouth => b.atan2(a) <= tol,
    }
}

struct Accumulator {
    width: f64,
    max_lag: f64,
    sq: Vec<f64>,
    dist: Vec<f64>,
    count: Vec<usize>,
}

impl Accumulator {
    fn new(max_lag: f64, n_bins: usize) -> Self {
        Self {
            width: max_lag / n_bins as f64,
            max_lag,
            sq: vec![0.0; n_bins],
            dist: vec![0.0; n_bins],
            count: vec![0; n_bins],
        }
    }

    fn bin(&self, h: f64) -> Option<usize> {
        if h <= 0.0 || h > self.max_lag * (1.0 + 1e-12) {
            return None;
        }
        let b = (h / self.width * (1.0 - 1e-12)).ceil() as usize;
        Some(b.clamp(1, self.count.len()) - 1)
    }

    fn finish(self, direction: Direction, angle_tolerance: f64, domain_extent: f64) -> VariogramBins {
        let lag_centers = self
            .dist
            .iter()
            .zip(&self.count)
            .map(|(&d, &c)| if c > 0 { d / c as f64 } else { f64::NAN })
            .collect();
        let semivariances = self
            .sq
            .iter()
            .zip(&self.count)
            .map(|(&s, &c)| if c > 0 { s / (2.0 * c as f64) } else { f64::NAN })
            .collect();
        VariogramBins {
            lag_centers,
            semivariances,
            pair_counts: self.count,
            bin_width: self.width,
            direction,
            angle_tolerance,
            domain_extent,
        }
    }
}

fn domain_diagonal(lat: &Lattice) -> f64 {
    let h = lat.spacing();
    ((lat.n1() - 1) as f64 * h).hypot((lat.n2() - 1) as f64 * h)
}

fn grid_values(field: &[f64], lat: &Lattice) -> Result<Vec<f64>, VariogramError> {
    if field.len() != lat.n_active() {
        return Err(VariogramError::DimensionMismatch {
            expected: lat.n_active(),
            found: field.len(),
        });
    }
    let grid = lat.to_grid(field, f64::NAN);
    if grid.iter().filter(|v| v.is_finite()).count() < 2 {
        return Err(VariogramError::TooFewNodes);
    }
    Ok(grid)
}

/// Matheron estimator over all pairs of valid nodes. `field` is indexed by
/// active slot; non-finite values mark nodes to skip.
pub fn empirical_variogram(field: &[f64], lat: &Lattice, spec: &BinSpec) -> Result<VariogramBins, VariogramError> {
    let grid = grid_values(field, lat)?;
    let h = lat.spacing();
    let max_lag = spec.resolved_max_lag(lat);
    if !(max_lag > h) || spec.n_bins == 0 {
        return Err(VariogramError::InvalidBins);
    }
    let (n1, n2) = (lat.n1() as isize, lat.n2() as isize);
    let reach = (max_lag / h).floor() as isize;
    let mut acc = Accumulator::new(max_lag, spec.n_bins);
    for dr in 0..=reach.min(n1 - 1) {
        let lo = if dr == 0 { 1 } else { -reach.min(n2 - 1) };
        for dc in lo..=reach.min(n2 - 1) {
            if !accepts(spec.direction, dr, dc, spec.angle_tolerance) {
                continue;
            }
            let dist = h * ((dr * dr + dc * dc) as f64).sqrt();
            let Some(b) = acc.bin(dist) else { continue };
            let (mut sq, mut count) = (0.0, 0usize);
            for r in 0..n1 - dr {
                let (c0, c1) = (0.max(-dc), n2.min(n2 - dc));
                let row_a = (r * n2) as usize;
                let row_b = ((r + dr) * n2) as usize;
                for c in c0..c1 {
                    let a = grid[row_a + c as usize];
                    let v = grid[(row_b as isize + c + dc) as usize];
                    let d = a - v;
                    if d.is_finite() {
                        sq += d * d;
                        count += 1;
                    }
                }
            }
            acc.sq[b] += sq;
            acc.dist[b] += dist * count as f64;
            acc.count[b] += count;
        }
    }
    Ok(acc.finish(spec.direction, spec.angle_tolerance, domain_diagonal(lat)))
}

/// Matheron estimator restricted to pairs on the same transect: rows for
/// E–W, columns for N–S. Only transects listed in `transects` contribute.
pub fn transect_variogram(
    field: &[f64],
    lat: &Lattice,
    direction: Direction,
    transects: &[usize],
    max_lag: Option<f64>,
    n_bins: usize,
) -> Result<VariogramBins, VariogramError> {
    let grid = grid_values(field, lat)?;
    let h = lat.spacing();
    let spec = BinSpec {
        direction,
        n_bins,
        max_lag,
        angle_tolerance: 0.0,
    };
    let max_lag = spec.resolved_max_lag(lat);
    if !(max_lag > h) || n_bins == 0 {
        return Err(VariogramError::InvalidBins);
    }
    let (n1, n2) = (lat.n1(), lat.n2());
    let (len, at): (usize, Box<dyn Fn(usize, usize) -> f64>) = match direction {
        Direction::EastWest => (n2, Box::new(|t, k| grid[t * n2 + k])),
        Direction::NorthSouth => (n1, Box::new(|t, k| grid[k * n2 + t])),
        Direction::Omni => return Err(VariogramError::TransectNeedsAxis),
    };
    let n_transects = if direction == Direction::EastWest { n1 } else { n2 };
    let mut acc = Accumulator::new(max_lag, n_bins);
    for &t in transects {
        if t >= n_transects {
            return Err(VariogramError::TransectOutOfRange(t));
        }
        for lag in 1..len {
            let dist = lag as f64 * h;
            let Some(b) = acc.bin(dist) else { break };
            for k in 0..len - lag {
                let d = at(t, k) - at(t, k + lag);
                if d.is_finite() {
                    acc.sq[b] += d * d;
                    acc.dist[b] += dist;
                    acc.count[b] += 1;
                }
            }
        }
    }
    Ok(acc.finish(direction, 0.0, domain_diagonal(lat)))
}
