//! Synthetic inputs: stationary Matérn Gaussian random fields on a grid,
//! additive composition with white noise, and missing-block insertion.
//!
//! Fields are drawn as `L·z` from a dense Cholesky factor of the covariance.
//! After factorization only the lower triangle is kept, packed in `f32`, so
//! a 10⁴-node factor costs about 200 MB between draws.

mod setups;

pub use setups::{Block, SetupGenerator, SimulatedData, SimulationSetup, REFERENCE_NOISE_SD};

use std::sync::Mutex;

use faer::{Mat, Side};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError};
use crate::variogram::MaternParams;

/// Largest grid the dense generator accepts by default.
pub const DEFAULT_NODE_LIMIT: usize = 10_000;
const INITIAL_JITTER: f64 = 1e-10;
const MAX_JITTER: f64 = 1e-6;

// one dense factorization at a time keeps peak memory near 2·n²·8 bytes
static DENSE_LOCK: Mutex<()> = Mutex::new(());

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error("{nodes} nodes exceed the dense-generation limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("covariance not positive definite even with jitter {0:e}")]
    Factorization(f64),
    #[error("field lengths differ ({expected} vs {found})")]
    LengthMismatch { expected: usize, found: usize },
    #[error("block {top_left:?}+{size:?} exceeds the {n1}×{n2} grid")]
    OutOfBounds {
        top_left: (usize, usize),
        size: (usize, usize),
        n1: usize,
        n2: usize,
    },
    #[error("coordinate scale factors must be positive")]
    InvalidScale,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Part of the grid a field is generated on; the rest stays zero. Row 0 is
/// the northern edge and, for odd `n1`, the middle row belongs to the lower
/// half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    #[default]
    Whole,
    LowerHalf,
    UpperHalf,
}

impl Region {
    pub fn contains(self, row: usize, n1: usize) -> bool {
        match self {
            Region::Whole => true,
            Region::LowerHalf => row >= n1 / 2,
            Region::UpperHalf => row < n1 / 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub params: MaternParams,
    /// Multiplier on E–W (column) distances.
    #[serde(default = "one")]
    pub scale_x: f64,
    /// Multiplier on N–S (row) distances.
    #[serde(default = "one")]
    pub scale_y: f64,
    #[serde(default)]
    pub region: Region,
}

fn one() -> f64 {
    1.0
}

impl FieldSpec {
    pub fn isotropic(params: MaternParams) -> Self {
        Self {
            params,
            scale_x: 1.0,
            scale_y: 1.0,
            region: Region::Whole,
        }
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    pub fn with_scale(mut self, scale_x: f64, scale_y: f64) -> Self {
        self.scale_x = scale_x;
        self.scale_y = scale_y;
        self
    }
}

/// Reusable generator for one field specification on one grid.
#[derive(Debug, Clone)]
pub struct GrfSampler {
    grid_size: usize,
    nodes: Vec<usize>,
    // row i holds L[i][0..=i]
    packed: Vec<f32>,
    jitter: f64,
}

impl GrfSampler {
    pub fn new(spec: &FieldSpec, lat: &Lattice) -> Result<Self, SimulateError> {
        Self::with_node_limit(spec, lat, DEFAULT_NODE_LIMIT)
    }

    pub fn with_node_limit(spec: &FieldSpec, lat: &Lattice, limit: usize) -> Result<Self, SimulateError> {
        spec.params.validate().map_err(|_| SimulateError::InvalidScale)?;
        if !(spec.scale_x > 0.0 && spec.scale_y > 0.0) {
            return Err(SimulateError::InvalidScale);
        }
        let (n1, n2) = (lat.n1(), lat.n2());
        let nodes: Vec<usize> = lat
            .active_nodes()
            .iter()
            .copied()
            .filter(|&g| spec.region.contains(g / n2, n1))
            .collect();
        let n = nodes.len();
        if n > limit {
            return Err(SimulateError::TooLarge { nodes: n, limit });
        }

        // stationary covariance depends on the lag only
        let h = lat.spacing();
        let p = spec.params;
        let lag_cov: Vec<f64> = (0..n1 * n2)
            .map(|k| {
                let (dr, dc) = (k / n2, k % n2);
                let dy = dr as f64 * h * spec.scale_y;
                let dx = dc as f64 * h * spec.scale_x;
                p.covariance(dx.hypot(dy))
            })
            .collect();
        let cov = |i: usize, j: usize| {
            let (a, b) = (nodes[i], nodes[j]);
            let dr = (a / n2).abs_diff(b / n2);
            let dc = (a % n2).abs_diff(b % n2);
            lag_cov[dr * n2 + dc]
        };

        let _guard = DENSE_LOCK.lock().unwrap_or_else(|e| e.into_inner());
        let scale = p.sill().max(f64::MIN_POSITIVE);
        let mut jitter = INITIAL_JITTER;
        loop {
            let c = Mat::<f64>::from_fn(n, n, |i, j| {
                if i == j {
                    cov(i, j) + jitter * scale
                } else {
                    cov(i, j)
                }
            });
            match c.llt(Side::Lower) {
                Ok(llt) => {
                    drop(c);
                    let l = llt.L();
                    let mut packed = Vec::with_capacity(n * (n + 1) / 2);
                    for i in 0..n {
                        for j in 0..=i {
                            packed.push(l[(i, j)] as f32);
                        }
                    }
                    return Ok(Self {
                        grid_size: n1 * n2,
                        nodes,
                        packed,
                        jitter,
                    });
                }
                Err(_) if jitter < MAX_JITTER => {
                    log::warn!("covariance factorization failed with jitter {jitter:e}; retrying");
                    jitter *= 10.0;
                }
                Err(_) => return Err(SimulateError::Factorization(jitter)),
            }
        }
    }

    /// Relative diagonal jitter that made the covariance factorizable.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// One draw over the full grid (row-major); nodes outside the region or
    /// the active area are zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.nodes.len();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = vec![0.0; self.grid_size];
        let mut offset = 0;
        for i in 0..n {
            let row = &self.packed[offset..offset + i + 1];
            out[self.nodes[i]] = row.iter().zip(&z).map(|(&l, &zj)| l as f64 * zj).sum();
            offset += i + 1;
        }
        out
    }
}

/// Convenience wrapper: factor and draw once.
pub fn sample_grf<R: Rng + ?Sized>(spec: &FieldSpec, lat: &Lattice, rng: &mut R) -> Result<Vec<f64>, SimulateError> {
    Ok(GrfSampler::new(spec, lat)?.sample(rng))
}

/// Sum of fields plus i.i.d. `N(0, noise_sd²)` noise.
pub fn compose<R: Rng + ?Sized>(fields: &[Vec<f64>], noise_sd: f64, rng: &mut R) -> Result<Vec<f64>, SimulateError> {
    let len = fields.first().map_or(0, Vec::len);
    let mut out = vec![0.0; len];
    for f in fields {
        if f.len() != len {
            return Err(SimulateError::LengthMismatch {
                expected: len,
                found: f.len(),
            });
        }
        for (o, v) in out.iter_mut().zip(f) {
            *o += v;
        }
    }
    if noise_sd > 0.0 {
        for o in out.iter_mut() {
            *o += noise_sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(out)
}

/// Clears the observation mask on a rectangular block; the active mask is
/// unchanged.
pub fn insert_missing_block(
    lat: &Lattice,
    top_left: (usize, usize),
    size: (usize, usize),
) -> Result<Lattice, SimulateError> {
    let (n1, n2) = (lat.n1(), lat.n2());
    let (r0, c0) = top_left;
    let (h, w) = size;
    if r0 + h > n1 || c0 + w > n2 {
        return Err(SimulateError::OutOfBounds { top_left, size, n1, n2 });
    }
    let mut observed = lat.observed_mask().to_vec();
    for r in r0..r0 + h {
        for c in c0..c0 + w {
            observed[r * n2 + c] = false;
        }
    }
    Ok(lat.with_observed(observed)?)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn exp_spec(range: f64) -> FieldSpec {
        FieldSpec::isotropic(MaternParams::new(range, 1.0, 0.0, 0.5).unwrap())
    }

    #[test]
    fn vanishing_sill_gives_numerically_zero_field() {
        let lat = Lattice::full(8, 8, 0.1).unwrap();
        let spec = FieldSpec::isotropic(MaternParams::new(0.2, 1e-12, 0.0, 1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = sample_grf(&spec, &lat, &mut rng).unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-5));
    }

    #[test]
    fn seeded_draws_repeat() {
        let lat = Lattice::full(6, 7, 0.1).unwrap();
        let s = GrfSampler::new(&exp_spec(0.2), &lat).unwrap();
        let a = s.sample(&mut ChaCha8Rng::seed_from_u64(4));
        let b = s.sample(&mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
    }

    #[test]
    fn region_fields_vanish_outside_their_half() {
        let lat = Lattice::full(5, 4, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lower = sample_grf(&exp_spec(0.2).with_region(Region::LowerHalf), &lat, &mut rng).unwrap();
        let upper = sample_grf(&exp_spec(0.2).with_region(Region::UpperHalf), &lat, &mut rng).unwrap();
        for (g, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            let row = g / 4;
            assert_eq!(l == 0.0, row < 2, "row {row}");
            assert_eq!(u == 0.0, row >= 2, "row {row}");
        }
    }

    #[test]
    fn node_limit_is_enforced() {
        let lat = Lattice::full(10, 10, 0.1).unwrap();
        let err = GrfSampler::with_node_limit(&exp_spec(0.2), &lat, 50).unwrap_err();
        assert_eq!(err, SimulateError::TooLarge { nodes: 100, limit: 50 });
    }

    #[test]
    fn compose_sums_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let one = vec![vec![0.5, -1.0]];
        assert_eq!(compose(&one, 0.0, &mut rng).unwrap(), vec![0.5, -1.0]);
        let two = vec![vec![1.0; 3], vec![2.0; 3]];
        assert_eq!(compose(&two, 0.0, &mut rng).unwrap(), vec![3.0; 3]);
        assert!(compose(&[vec![1.0], vec![1.0, 2.0]], 0.0, &mut rng).is_err());
    }

    #[test]
    fn missing_block_counts_and_idempotence() {
        let lat = Lattice::full(100, 100, 0.01).unwrap();
        let once = insert_missing_block(&lat, (43, 43), (15, 15)).unwrap();
        assert_eq!(once.n_missing(), 225);
        assert!((once.n_missing() as f64 / once.n_active() as f64 - 0.0225).abs() < 1e-15);
        assert_eq!(insert_missing_block(&once, (43, 43), (15, 15)).unwrap(), once);
        assert_eq!(insert_missing_block(&lat, (10, 10), (0, 0)).unwrap(), lat);
        assert!(insert_missing_block(&lat, (90, 0), (15, 1)).is_err());
    }
}
