//! Moving-window functional diversity over stacks of trait grids:
//! richness (hull volume), divergence and evenness.

mod hull;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::Lattice;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiversityError {
    #[error("trait grid {index} has length {found}, expected {expected}")]
    TraitLength { index: usize, expected: usize, found: usize },
    #[error("at least 2 traits are required (got {0})")]
    TooFewTraits(usize),
    #[error("functional richness needs exactly 3 traits (got {0})")]
    RichnessNeedsThreeTraits(usize),
    #[error("radius must be positive and finite (got {0})")]
    InvalidRadius(f64),
    #[error("slot {0} is not an observed active node")]
    InvalidCenter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiversityIndex {
    FRich,
    FDiv,
    FEve,
}

impl DiversityIndex {
    pub fn name(self) -> &'static str {
        match self {
            Self::FRich => "frich",
            Self::FDiv => "fdiv",
            Self::FEve => "feve",
        }
    }
}

/// Index value with a flag for communities where the index is undefined;
/// flagged values are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexValue {
    pub value: f64,
    pub degenerate: bool,
}

impl IndexValue {
    fn ok(value: f64) -> Self {
        Self { value, degenerate: false }
    }

    fn degenerate() -> Self {
        Self {
            value: 0.0,
            degenerate: true,
        }
    }
}

/// Trait grids indexed by active slot; missing nodes of the lattice carry no
/// trait values that are ever read.
#[derive(Debug, Clone)]
pub struct TraitStack {
    lat: Lattice,
    traits: Vec<Vec<f64>>,
}

impl TraitStack {
    pub fn new(lat: Lattice, traits: Vec<Vec<f64>>) -> Result<Self, DiversityError> {
        if traits.len() < 2 {
            return Err(DiversityError::TooFewTraits(traits.len()));
        }
        for (index, t) in traits.iter().enumerate() {
            if t.len() != lat.n_active() {
                return Err(DiversityError::TraitLength {
                    index,
                    expected: lat.n_active(),
                    found: t.len(),
                });
            }
        }
        Ok(Self { lat, traits })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn n_traits(&self) -> usize {
        self.traits.len()
    }

    pub fn traits(&self) -> &[Vec<f64>] {
        &self.traits
    }

    /// Trait vectors of the given slots.
    pub fn points(&self, slots: &[usize]) -> Vec<Vec<f64>> {
        slots
            .iter()
            .map(|&s| self.traits.iter().map(|t| t[s]).collect())
            .collect()
    }
}

/// Slots of the observed active pixels within `radius` (inclusive) of the
/// centre pixel, measured between pixel centres.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Community {
    pub center: usize,
    pub members: Vec<usize>,
}

impl Community {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn community(lat: &Lattice, center: usize, radius: f64) -> Result<Community, DiversityError> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(DiversityError::InvalidRadius(radius));
    }
    let observed = lat.observed_slots();
    if center >= lat.n_active() || !observed[center] {
        return Err(DiversityError::InvalidCenter(center));
    }
    Ok(community_with(lat, &observed, center, radius))
}

fn community_with(lat: &Lattice, observed: &[bool], center: usize, radius: f64) -> Community {
    let h = lat.spacing();
    let (r0, c0) = lat.row_col(lat.active_nodes()[center]);
    let reach = (radius / h).floor() as isize;
    let r2 = (radius / h) * (radius / h) * (1.0 + 1e-12);
    let (n1, n2) = (lat.n1() as isize, lat.n2() as isize);
    let mut members = Vec::new();
    for dr in -reach..=reach {
        let r = r0 as isize + dr;
        if r < 0 || r >= n1 {
            continue;
        }
        for dc in -reach..=reach {
            let c = c0 as isize + dc;
            if c < 0 || c >= n2 || ((dr * dr + dc * dc) as f64) > r2 {
                continue;
            }
            if let Some(s) = lat.slot((r * n2 + c) as usize) {
                if observed[s] {
                    members.push(s);
                }
            }
        }
    }
    Community { center, members }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Functional divergence around the unweighted centroid.
pub fn fdiv(points: &[Vec<f64>]) -> IndexValue {
    let c = points.len();
    if c < 2 {
        return IndexValue::degenerate();
    }
    let dim = points[0].len();
    let centroid: Vec<f64> = (0..dim)
        .map(|k| points.iter().map(|p| p[k]).sum::<f64>() / c as f64)
        .collect();
    let dg: Vec<f64> = points.iter().map(|p| distance(p, &centroid)).collect();
    let mean = dg.iter().sum::<f64>() / c as f64;
    if !(mean > 0.0) {
        return IndexValue::degenerate();
    }
    let spread = dg.iter().map(|d| (d - mean).abs()).sum::<f64>() / c as f64;
    IndexValue::ok(mean / (spread + mean))
}

/// Branch lengths of the Euclidean minimum spanning tree (dense Prim).
pub fn mst_branch_lengths(points: &[Vec<f64>]) -> Vec<f64> {
    let c = points.len();
    if c < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; c];
    let mut best = vec![f64::INFINITY; c];
    let mut branches = Vec::with_capacity(c - 1);
    in_tree[0] = true;
    let mut last = 0;
    for _ in 1..c {
        let mut next = usize::MAX;
        for j in 0..c {
            if in_tree[j] {
                continue;
            }
            best[j] = best[j].min(distance(&points[last], &points[j]));
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        in_tree[next] = true;
        branches.push(best[next]);
        last = next;
    }
    branches
}

/// Functional evenness from the regularity of minimum-spanning-tree branch
/// lengths.
pub fn feve(points: &[Vec<f64>]) -> IndexValue {
    let c = points.len();
    if c < 3 {
        return IndexValue::degenerate();
    }
    let branches = mst_branch_lengths(points);
    let total: f64 = branches.iter().sum();
    if !(total > 0.0) {
        return IndexValue::degenerate();
    }
    let even = 1.0 / (c - 1) as f64;
    let sum_min: f64 = branches.iter().map(|&b| (b / total).min(even)).sum();
    IndexValue::ok(((sum_min - even) / (1.0 - even)).clamp(0.0, 1.0))
}

/// Functional richness as the volume of the convex hull in 3-trait space.
pub fn frich(points: &[Vec<f64>]) -> Result<IndexValue, DiversityError> {
    if let Some(p) = points.iter().find(|p| p.len() != 3) {
        return Err(DiversityError::RichnessNeedsThreeTraits(p.len()));
    }
    let pts: Vec<[f64; 3]> = points.iter().map(|p| [p[0], p[1], p[2]]).collect();
    Ok(match hull::hull_volume(&pts) {
        Some(v) => IndexValue::ok(v),
        None => IndexValue::degenerate(),
    })
}

pub fn index_value(index: DiversityIndex, points: &[Vec<f64>]) -> Result<IndexValue, DiversityError> {
    Ok(match index {
        DiversityIndex::FRich => frich(points)?,
        DiversityIndex::FDiv => fdiv(points),
        DiversityIndex::FEve => feve(points),
    })
}

/// Per-slot index values; `NaN` where the pixel is missing or its community
/// is degenerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMap {
    pub index: DiversityIndex,
    pub radius: f64,
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub community_sizes: Vec<usize>,
}

impl IndexMap {
    pub fn n_flagged(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }

    /// Degenerate richness is a genuine zero volume.
    pub fn value_or_zero(&self, slot: usize) -> f64 {
        if self.values[slot].is_finite() {
            self.values[slot]
        } else {
            0.0
        }
    }
}

pub fn index_map(stack: &TraitStack, radius: f64, index: DiversityIndex) -> Result<IndexMap, DiversityError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DiversityError::InvalidRadius(radius));
    }
    if index == DiversityIndex::FRich && stack.n_traits() != 3 {
        return Err(DiversityError::RichnessNeedsThreeTraits(stack.n_traits()));
    }
    let lat = stack.lattice();
    let observed = lat.observed_slots();
    let n = lat.n_active();
    let mut values = vec![f64::NAN; n];
    let mut degenerate = vec![false; n];
    let mut community_sizes = vec![0; n];
    for s in (0..n).filter(|&s| observed[s]) {
        let comm = community_with(lat, &observed, s, radius);
        community_sizes[s] = comm.len();
        let v = index_value(index, &stack.points(&comm.members))?;
        if v.degenerate {
            degenerate[s] = true;
        } else {
            values[s] = v.value;
        }
    }
    Ok(IndexMap {
        index,
        radius,
        values,
        degenerate,
        community_sizes,
    })
}
