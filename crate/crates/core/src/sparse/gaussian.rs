use rand::Rng;
use rand_distr::StandardNormal;

use super::{CholeskyFactor, Ordering, SparseError, SparseMatrix, SymbolicCholesky};

/// Draws one sample from the canonical-form normal `N_C(b, P)`, i.e. mean
/// `P⁻¹b` and covariance `P⁻¹`, without forming the inverse.
pub fn sample_canonical_normal<R: Rng + ?Sized>(
    precision: &SparseMatrix,
    canonical_mean: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>, SparseError> {
    let factor = CholeskyFactor::new(precision, Ordering::default())?;
    sample_with_factor(&factor, canonical_mean, rng)
}

/// Same as [`sample_canonical_normal`] but reusing a symbolic analysis of
/// the precision pattern.
pub fn sample_canonical_normal_with(
    symbolic: &std::sync::Arc<SymbolicCholesky>,
    precision: &SparseMatrix,
    canonical_mean: &[f64],
    rng: &mut impl Rng,
) -> Result<Vec<f64>, SparseError> {
    let factor = symbolic.factor(precision)?;
    sample_with_factor(&factor, canonical_mean, rng)
}

pub fn sample_with_factor<R: Rng + ?Sized>(
    factor: &CholeskyFactor,
    canonical_mean: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>, SparseError> {
    let z: Vec<f64> = (0..factor.dim()).map(|_| rng.sample(StandardNormal)).collect();
    factor.solve_perturbed(canonical_mean, &z)
}
