//! Lattice geometry and spatial-weight (IGMRF precision structure) matrices.
//!
//! Grid nodes are numbered row-major: node `(r, c)` of an `n1 × n2` grid has
//! grid index `r·n2 + c`, row 0 being the northernmost row. Vectors over the
//! analysis domain (latent field, details, masks) are indexed by *active
//! slot*: the active nodes in increasing grid index.

mod weights;

pub use weights::{
    build_adjacency_q, build_regular_q, connected_components, mask_q, structure_matrix,
    Components, WeightMatrix,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("grid extent must be at least 2 along each axis (got {n1}×{n2})")]
    GridTooSmall { n1: usize, n2: usize },
    #[error("structure matrix needs n ≥ 2 (got {0})")]
    StructureTooSmall(usize),
    #[error("mask length {found} does not match grid size {expected}")]
    MaskLength { expected: usize, found: usize },
    #[error("node {0} is observed but not active")]
    ObservedInactive(usize),
    #[error("at least 2 active nodes are required (got {0})")]
    TooFewActive(usize),
    #[error("at least one observed node is required")]
    NoObservations,
    #[error("anisotropy weights must be non-negative and sum to 2 (got {0}, {1})")]
    InvalidAnisotropy(f64, f64),
    #[error("spacing must be positive and finite (got {0})")]
    InvalidSpacing(f64),
    #[error("edge ({0}, {0}) is a self loop")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) listed twice")]
    DuplicateEdge(usize, usize),
    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("edge weight {0} must be positive and finite")]
    InvalidWeight(f64),
    #[error("weight list length {found} does not match edge count {expected}")]
    WeightCount { expected: usize, found: usize },
    #[error("matrix dimension {found} does not match the full grid ({expected})")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Relative anisotropy of the first-order random-walk coupling along the
/// two grid axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnisotropyWeights {
    /// Coupling between vertically adjacent nodes (along the N–S axis).
    pub alpha1: f64,
    /// Coupling between horizontally adjacent nodes (along the E–W axis).
    pub alpha2: f64,
}

impl AnisotropyWeights {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self, LatticeError> {
        let ok = alpha1 >= 0.0
            && alpha2 >= 0.0
            && alpha1.is_finite()
            && alpha2.is_finite()
            && (alpha1 + alpha2 - 2.0).abs() <= 1e-12;
        if ok {
            Ok(Self { alpha1, alpha2 })
        } else {
            Err(LatticeError::InvalidAnisotropy(alpha1, alpha2))
        }
    }

    pub fn isotropic() -> Self {
        Self {
            alpha1: 1.0,
            alpha2: 1.0,
        }
    }
}

impl Default for AnisotropyWeights {
    fn default() -> Self {
        Self::isotropic()
    }
}

/// Regular grid with an area-of-interest mask and an observation mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeSpec", into = "LatticeSpec")]
pub struct Lattice {
    n1: usize,
    n2: usize,
    spacing: f64,
    active: Vec<bool>,
    observed: Vec<bool>,
    slots: Vec<usize>,
    slot_of: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub n1: usize,
    pub n2: usize,
    pub spacing: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<Vec<bool>>,
}

impl TryFrom<LatticeSpec> for Lattice {
    type Error = LatticeError;

    fn try_from(s: LatticeSpec) -> Result<Self, Self::Error> {
        let size = s.n1 * s.n2;
        let active = s.active.unwrap_or_else(|| vec![true; size]);
        let observed = s.observed.unwrap_or_else(|| active.clone());
        Lattice::with_masks(s.n1, s.n2, s.spacing, active, observed)
    }
}

impl From<Lattice> for LatticeSpec {
    fn from(l: Lattice) -> Self {
        let all_active = l.active.iter().all(|&a| a);
        let all_observed = l.observed == l.active;
        LatticeSpec {
            n1: l.n1,
            n2: l.n2,
            spacing: l.spacing,
            active: (!all_active).then_some(l.active),
            observed: (!all_observed).then_some(l.observed),
        }
    }
}

impl Lattice {
    /// Fully active, fully observed grid.
    pub fn full(n1: usize, n2: usize, spacing: f64) -> Result<Self, LatticeError> {
        let size = n1 * n2;
        Self::with_masks(n1, n2, spacing, vec![true; size], vec![true; size])
    }

    pub fn with_masks(
        n1: usize,
        n2: usize,
        spacing: f64,
        active: Vec<bool>,
        observed: Vec<bool>,
    ) -> Result<Self, LatticeError> {
        if n1 == 0 || n2 == 0 || n1 * n2 < 2 {
            return Err(LatticeError::GridTooSmall { n1, n2 });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(LatticeError::InvalidSpacing(spacing));
        }
        let size = n1 * n2;
        for m in [&active, &observed] {
            if m.len() != size {
                return Err(LatticeError::MaskLength {
                    expected: size,
                    found: m.len(),
                });
            }
        }
        if let Some(i) = (0..size).find(|&i| observed[i] && !active[i]) {
            return Err(LatticeError::ObservedInactive(i));
        }
        let slots: Vec<usize> = (0..size).filter(|&i| active[i]).collect();
        if slots.len() < 2 {
            return Err(LatticeError::TooFewActive(slots.len()));
        }
        if !observed.iter().any(|&o| o) {
            return Err(LatticeError::NoObservations);
        }
        let mut slot_of = vec![None; size];
        for (s, &g) in slots.iter().enumerate() {
            slot_of[g] = Some(s);
        }
        Ok(Self {
            n1,
            n2,
            spacing,
            active,
            observed,
            slots,
            slot_of,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn grid_size(&self) -> usize {
        self.n1 * self.n2
    }

    /// Number of active nodes `n`.
    pub fn n_active(&self) -> usize {
        self.slots.len()
    }

    /// Number of observed nodes `m`.
    pub fn n_observed(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn n_missing(&self) -> usize {
        self.n_active() - self.n_observed()
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    pub fn observed_mask(&self) -> &[bool] {
        &self.observed
    }

    pub fn is_fully_active(&self) -> bool {
        self.slots.len() == self.grid_size()
    }

    /// Grid index of each active slot.
    pub fn active_nodes(&self) -> &[usize] {
        &self.slots
    }

    pub fn slot(&self, grid_index: usize) -> Option<usize> {
        self.slot_of.get(grid_index).copied().flatten()
    }

    pub fn row_col(&self, grid_index: usize) -> (usize, usize) {
        (grid_index / self.n2, grid_index % self.n2)
    }

    /// Observed flag per active slot.
    pub fn observed_slots(&self) -> Vec<bool> {
        self.slots.iter().map(|&g| self.observed[g]).collect()
    }

    /// Same geometry with a different observation mask.
    pub fn with_observed(&self, observed: Vec<bool>) -> Result<Self, LatticeError> {
        Self::with_masks(self.n1, self.n2, self.spacing, self.active.clone(), observed)
    }

    /// Scatters a slot vector onto the full grid, `fill` at inactive nodes.
    pub fn to_grid(&self, slot_values: &[f64], fill: f64) -> Vec<f64> {
        let mut g = vec![fill; self.grid_size()];
        for (&gi, &v) in self.slots.iter().zip(slot_values) {
            g[gi] = v;
        }
        g
    }

    /// Gathers active-slot values from a full-grid vector.
    pub fn from_grid(&self, grid_values: &[f64]) -> Vec<f64> {
        self.slots.iter().map(|&g| grid_values[g]).collect()
    }
}

/// Selection operator `H`: picks the observed entries out of a vector over
/// active slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOperator {
    n: usize,
    kept: Vec<usize>,
}

impl SelectionOperator {
    pub fn new(lat: &Lattice) -> Self {
        let kept = lat
            .observed_slots()
            .iter()
            .enumerate()
            .filter_map(|(s, &o)| o.then_some(s))
            .collect();
        Self {
            n: lat.n_active(),
            kept,
        }
    }

    pub fn from_observed(observed: &[bool]) -> Self {
        Self {
            n: observed.len(),
            kept: (0..observed.len()).filter(|&i| observed[i]).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            kept: (0..n).collect(),
        }
    }

    /// Input dimension `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Output dimension `m`.
    pub fn m(&self) -> usize {
        self.kept.len()
    }

    pub fn kept_indices(&self) -> &[usize] {
        &self.kept
    }

    pub fn is_identity(&self) -> bool {
        self.kept.len() == self.n
    }

    /// `H x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&i| x[i]).collect()
    }

    /// `Hᵀ y`, zero at unobserved slots.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&i, &v) in self.kept.iter().zip(y) {
            out[i] = v;
        }
        out
    }

    /// Diagonal of `HᵀH`.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        self.apply_transpose(&vec![1.0; self.m()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_invariants() {
        assert!(Lattice::full(1, 1, 1.0).is_err());
        assert!(Lattice::full(3, 3, 0.0).is_err());
        let err = Lattice::with_masks(1, 3, 1.0, vec![true, false, true], vec![false, true, true]);
        assert_eq!(err, Err(LatticeError::ObservedInactive(1)));
        let err = Lattice::with_masks(1, 3, 1.0, vec![true, true, true], vec![false; 3]);
        assert_eq!(err, Err(LatticeError::NoObservations));
        let lat =
            Lattice::with_masks(2, 2, 1.0, vec![true, false, true, true], vec![true, false, false, true])
                .unwrap();
        assert_eq!(lat.n_active(), 3);
        assert_eq!(lat.n_observed(), 2);
        assert_eq!(lat.n_missing(), 1);
        assert_eq!(lat.active_nodes(), &[0, 2, 3]);
        assert_eq!(lat.slot(2), Some(1));
        assert_eq!(lat.slot(1), None);
        assert_eq!(lat.to_grid(&[1.0, 2.0, 3.0], f64::NAN)[2], 2.0);
    }

    #[test]
    fn lattice_json_round_trip() {
        let lat =
            Lattice::with_masks(2, 2, 0.5, vec![true, true, false, true], vec![true, false, false, true])
                .unwrap();
        let s = serde_json::to_string(&lat).unwrap();
        let back: Lattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back, lat);
        assert!(serde_json::from_str::<Lattice>(r#"{"n1":2,"n2":2,"spacing":1,"bogus":1}"#).is_err());
    }

    #[test]
    fn anisotropy_constraint() {
        assert!(AnisotropyWeights::new(1.5, 0.5).is_ok());
        assert!(AnisotropyWeights::new(2.0, 0.0).is_ok());
        assert!(AnisotropyWeights::new(1.0, 0.5).is_err());
        assert!(AnisotropyWeights::new(-1.0, 3.0).is_err());
    }

    #[test]
    fn selection_direct_definition() {
        let h = SelectionOperator::from_observed(&[true, false, true, false]);
        assert_eq!(h.apply(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 3.0]);
        assert_eq!(h.apply_transpose(&[5.0, 6.0]), vec![5.0, 0.0, 6.0, 0.0]);
        assert!(SelectionOperator::identity(3).is_identity());
        assert_eq!(SelectionOperator::identity(3).apply(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn gram_zeroes_missing_for_every_mask() {
        let x = [1.5, -2.0, 3.25, 4.0];
        for mask_bits in 1u32..16 {
            let obs: Vec<bool> = (0..4).map(|i| mask_bits & (1 << i) != 0).collect();
            let h = SelectionOperator::from_observed(&obs);
            let hth_x = h.apply_transpose(&h.apply(&x));
            let via_diag: Vec<f64> = h.gram_diagonal().iter().zip(&x).map(|(d, v)| d * v).collect();
            for i in 0..4 {
                let expect = if obs[i] { x[i] } else { 0.0 };
                assert_eq!(hth_x[i], expect);
                assert_eq!(via_diag[i], expect);
            }
            // idempotent
            assert_eq!(h.apply_transpose(&h.apply(&hth_x)), hth_x);
        }
    }
}
