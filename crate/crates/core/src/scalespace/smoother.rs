use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{NormKind, ScaleGrid, ScaleSet, ScalespaceError};
use crate::lattice::{connected_components, Components};
use crate::sampler::PosteriorChain;
use crate::sparse::{CholeskyFactor, Ordering, SparseMatrix, SymbolicCholesky};

const CACHE_CAPACITY: usize = 16;

/// Smoother over a fixed spatial-weight matrix. The symbolic factorization of
/// `I + λQ` is shared by every λ; numeric factors for repeatedly used λ are
/// cached.
#[derive(Debug)]
pub struct Smoother {
    q: SparseMatrix,
    symbolic: Arc<SymbolicCholesky>,
    components: Components,
    cache: Mutex<HashMap<u64, Arc<CholeskyFactor>>>,
}

/// Both norms of `D_λx` over a scale grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCurves {
    pub lambdas: Vec<f64>,
    pub euclidean: Vec<f64>,
    pub maximum: Vec<f64>,
}

impl NormCurves {
    pub fn get(&self, norm: NormKind) -> &[f64] {
        match norm {
            NormKind::Euclidean => &self.euclidean,
            NormKind::Maximum => &self.maximum,
        }
    }
}

impl Smoother {
    pub fn new(q: &SparseMatrix) -> Result<Self, ScalespaceError> {
        let q = q.with_full_diagonal();
        let symbolic = SymbolicCholesky::analyze(&q, Ordering::default())?;
        let components = connected_components(&q);
        Ok(Self {
            q,
            symbolic,
            components,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn components(&self) -> &Components {
        &self.components
    }

    fn check(&self, x: &[f64]) -> Result<(), ScalespaceError> {
        if x.len() != self.dim() {
            return Err(ScalespaceError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        match x.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(ScalespaceError::NonFiniteInput(i)),
            None => Ok(()),
        }
    }

    fn factor_uncached(&self, lambda: f64) -> Result<CholeskyFactor, ScalespaceError> {
        let a = self.q.scaled_plus_diagonal(lambda, &vec![1.0; self.dim()])?;
        Ok(self.symbolic.factor(&a)?)
    }

    /// Numeric factor of `I + λQ`, cached.
    pub fn factor(&self, lambda: f64) -> Result<Arc<CholeskyFactor>, ScalespaceError> {
        let key = lambda.to_bits();
        if let Some(f) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(self.factor_uncached(lambda)?);
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&f));
        Ok(f)
    }

    /// Per-component mean, broadcast to every node.
    pub fn mean_field(&self, x: &[f64]) -> Vec<f64> {
        self.components.mean_field(x)
    }

    /// `S_λ x`; `λ = 0` returns `x` unchanged and `λ = ∞` the per-component
    /// mean.
    pub fn smooth(&self, x: &[f64], lambda: f64) -> Result<Vec<f64>, ScalespaceError> {
        self.check(x)?;
        if lambda.is_nan() || lambda < 0.0 {
            return Err(ScalespaceError::InvalidLambda(lambda));
        }
        if lambda == 0.0 {
            return Ok(x.to_vec());
        }
        if lambda.is_infinite() {
            return Ok(self.mean_field(x));
        }
        Ok(self.factor(lambda)?.solve(x)?)
    }

    /// `x` minus its component means, or all zeros when `x` is constant on
    /// every component to rounding. The scale derivative is invariant under
    /// this shift.
    fn centred(&self, x: &[f64]) -> Vec<f64> {
        let mean = self.mean_field(x);
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let c: Vec<f64> = x.iter().zip(&mean).map(|(a, b)| a - b).collect();
        let spread = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if spread <= 1e-13 * scale {
            vec![0.0; x.len()]
        } else {
            c
        }
    }

    fn derivative_with(&self, f: &CholeskyFactor, xc: &[f64], lambda: f64) -> Result<Vec<f64>, ScalespaceError> {
        let u = f.solve(xc)?;
        let w = self.q.matvec(&u)?;
        let mut v = f.solve(&w)?;
        v.iter_mut().for_each(|a| *a *= lambda);
        Ok(v)
    }

    /// `D_λx = λ (I + λQ)⁻¹ Q (I + λQ)⁻¹ x` from a single factorization.
    pub fn scale_derivative(&self, x: &[f64], lambda: f64) -> Result<Vec<f64>, ScalespaceError> {
        self.check(x)?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ScalespaceError::InvalidLambda(lambda));
        }
        let f = self.factor(lambda)?;
        self.derivative_with(&f, &self.centred(x), lambda)
    }

    pub fn norm_curves(&self, x: &[f64], grid: &ScaleGrid) -> Result<NormCurves, ScalespaceError> {
        Ok(self.norm_curves_many(&[x], grid)?.pop().unwrap())
    }

    /// Norm curves for several fields, factoring each λ once.
    pub fn norm_curves_many(&self, xs: &[&[f64]], grid: &ScaleGrid) -> Result<Vec<NormCurves>, ScalespaceError> {
        grid.validate()?;
        for x in xs {
            self.check(x)?;
        }
        let lambdas = grid.lambdas();
        let centred: Vec<Vec<f64>> = xs.iter().map(|x| self.centred(x)).collect();
        let mut out: Vec<NormCurves> = xs
            .iter()
            .map(|_| NormCurves {
                lambdas: lambdas.clone(),
                euclidean: Vec::with_capacity(lambdas.len()),
                maximum: Vec::with_capacity(lambdas.len()),
            })
            .collect();
        for &lambda in &lambdas {
            let f = self.factor_uncached(lambda)?;
            for (xc, curves) in centred.iter().zip(&mut out) {
                let d = self.derivative_with(&f, xc, lambda)?;
                curves.euclidean.push(NormKind::Euclidean.apply(&d));
                curves.maximum.push(NormKind::Maximum.apply(&d));
            }
        }
        Ok(out)
    }

    pub fn norm_curve(&self, x: &[f64], grid: &ScaleGrid, norm: NormKind) -> Result<Vec<f64>, ScalespaceError> {
        Ok(self.norm_curves(x, grid)?.get(norm).to_vec())
    }

    /// Details `z_ℓ = S_{λ_ℓ}x − S_{λ_{ℓ+1}}x` for `ℓ < L` and `z_L` the
    /// component mean; they sum to `x`.
    pub fn details(&self, x: &[f64], scales: &ScaleSet) -> Result<Vec<Vec<f64>>, ScalespaceError> {
        self.check(x)?;
        let smooths = scales
            .lambdas()
            .into_iter()
            .map(|l| self.smooth(x, l))
            .collect::<Result<Vec<_>, _>>()?;
        let mut details: Vec<Vec<f64>> = smooths
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect())
            .collect();
        details.push(smooths.last().unwrap().clone());
        Ok(details)
    }

    pub fn decompose(&self, x: &[f64], scales: &ScaleSet) -> Result<DetailStack, ScalespaceError> {
        Ok(DetailStack {
            scale_set: scales.clone(),
            details: self.details(x, scales)?,
            draws: None,
        })
    }

    /// Per-draw details and their posterior mean.
    pub fn decompose_chain(&self, chain: &PosteriorChain, scales: &ScaleSet) -> Result<DetailStack, ScalespaceError> {
        let draws = chain
            .draws()
            .map(|d| self.details(d, scales))
            .collect::<Result<Vec<_>, _>>()?;
        let l = scales.n_details();
        let mut details = vec![vec![0.0; self.dim()]; l];
        for d in &draws {
            for (acc, z) in details.iter_mut().zip(d) {
                for (a, v) in acc.iter_mut().zip(z) {
                    *a += v;
                }
            }
        }
        let s = draws.len().max(1) as f64;
        details.iter_mut().flatten().for_each(|a| *a /= s);
        Ok(DetailStack {
            scale_set: scales.clone(),
            details,
            draws: Some(draws),
        })
    }
}

/// Details of a field or of every draw of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailStack {
    pub scale_set: ScaleSet,
    /// `z_1 … z_L` of the field, or their posterior means.
    pub details: Vec<Vec<f64>>,
    /// `draws[s][ℓ]` is detail ℓ of draw s.
    pub draws: Option<Vec<Vec<Vec<f64>>>>,
}

impl DetailStack {
    pub fn n_details(&self) -> usize {
        self.details.len()
    }

    /// Draws of detail ℓ, one row per posterior sample.
    pub fn detail_draws(&self, l: usize) -> Option<Vec<&[f64]>> {
        self.draws
            .as_ref()
            .map(|d| d.iter().map(|draw| draw[l].as_slice()).collect())
    }

    /// Largest deviation of `Σ_ℓ z_ℓ` from `x`.
    pub fn additivity_error(details: &[Vec<f64>], x: &[f64]) -> f64 {
        (0..x.len())
            .map(|i| (details.iter().map(|z| z[i]).sum::<f64>() - x[i]).abs())
            .fold(0.0, f64::max)
    }
}

pub fn smooth(x: &[f64], q: &SparseMatrix, lambda: f64) -> Result<Vec<f64>, ScalespaceError> {
    Smoother::new(q)?.smooth(x, lambda)
}

pub fn scale_derivative(x: &[f64], q: &SparseMatrix, lambda: f64) -> Result<Vec<f64>, ScalespaceError> {
    Smoother::new(q)?.scale_derivative(x, lambda)
}

pub fn norm_curve(x: &[f64], q: &SparseMatrix, grid: &ScaleGrid, norm: NormKind) -> Result<Vec<f64>, ScalespaceError> {
    Smoother::new(q)?.norm_curve(x, grid, norm)
}

pub fn decompose(x: &[f64], q: &SparseMatrix, scales: &ScaleSet) -> Result<DetailStack, ScalespaceError> {
    Smoother::new(q)?.decompose(x, scales)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_regular_q, structure_matrix, AnisotropyWeights, Lattice};

    fn grid_q(n1: usize, n2: usize) -> SparseMatrix {
        build_regular_q(&Lattice::full(n1, n2, 1.0).unwrap(), AnisotropyWeights::isotropic()).unwrap()
    }

    #[test]
    fn zero_lambda_is_identity_bitwise() {
        let x = vec![0.1, -3.3, 2.0, 1e-300];
        let s = Smoother::new(&grid_q(2, 2)).unwrap();
        assert_eq!(s.smooth(&x, 0.0).unwrap(), x);
    }

    #[test]
    fn constants_pass_through() {
        let s = Smoother::new(&grid_q(4, 3)).unwrap();
        let x = vec![2.5; 12];
        for l in [0.1, 1.0, 100.0, f64::INFINITY] {
            let y = s.smooth(&x, l).unwrap();
            assert!(y.iter().all(|v| (v - 2.5).abs() < 1e-12));
        }
        assert!(s.scale_derivative(&x, 3.0).unwrap().iter().all(|&v| v == 0.0));
        let c = s.norm_curves(&x, &ScaleGrid::default()).unwrap();
        assert!(c.euclidean.iter().chain(&c.maximum).all(|&v| v == 0.0));
    }

    #[test]
    fn three_node_path_matches_closed_form() {
        // [[2,-1,0],[-1,3,-1],[0,-1,2]] s = (0,3,0) → s = (0.75, 1.5, 0.75)
        let q = structure_matrix(3).unwrap();
        let s = smooth(&[0.0, 3.0, 0.0], &q, 1.0).unwrap();
        for (a, b) in s.iter().zip([0.75, 1.5, 0.75]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_lambda_gives_component_means() {
        // two disconnected pairs
        let q = crate::lattice::build_adjacency_q(4, &[(0, 1), (2, 3)], None).unwrap();
        let s = Smoother::new(&q.matrix).unwrap();
        assert_eq!(s.smooth(&[1.0, 3.0, 10.0, 20.0], f64::INFINITY).unwrap(), vec![2.0, 2.0, 15.0, 15.0]);
    }

    #[test]
    fn trivial_decomposition_is_centring() {
        let s = Smoother::new(&grid_q(3, 3)).unwrap();
        let x: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let d = s.decompose(&x, &ScaleSet::trivial()).unwrap();
        assert_eq!(d.n_details(), 2);
        assert!(d.details[1].iter().all(|&v| (v - 4.0).abs() < 1e-12));
        for (z, v) in d.details[0].iter().zip(&x) {
            assert!((z - (v - 4.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_lambda_and_nan() {
        let s = Smoother::new(&grid_q(2, 2)).unwrap();
        assert!(s.smooth(&[0.0; 4], -1.0).is_err());
        assert!(s.smooth(&[0.0, f64::NAN, 0.0, 0.0], 1.0).is_err());
        assert!(s.scale_derivative(&[0.0; 4], 0.0).is_err());
    }
}
