use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dominant_features::lattice::{build_regular_q, AnisotropyWeights, Lattice};
use dominant_features::sparse::ordering::inverse_permutation;
use dominant_features::sparse::{sample_canonical_normal, CholeskyFactor, Ordering, SparseMatrix, SymbolicCholesky};

const ORDERINGS: [Ordering; 3] = [Ordering::Natural, Ordering::BandwidthReducing, Ordering::NestedDissection];

fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.dim(), a.dim(), &a.to_dense())
}

/// `κQ + diag(shift)` on an `n1 × n2` grid.
fn system(n1: usize, n2: usize, alpha1: f64, kappa: f64, shift: &[f64]) -> SparseMatrix {
    let lat = Lattice::full(n1, n2, 1.0).unwrap();
    let w = AnisotropyWeights::new(alpha1, 2.0 - alpha1).unwrap();
    build_regular_q(&lat, w).unwrap().scaled_plus_diagonal(kappa, &shift[..n1 * n2]).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

prop_compose! {
    fn grid_system()(
        n1 in 2usize..=6,
        n2 in 2usize..=6,
        alpha1 in 0.0f64..=2.0,
        kappa in 0.05f64..10.0,
        shift in prop::collection::vec(0.01f64..5.0, 36),
        b in prop::collection::vec(-10.0f64..10.0, 36),
    ) -> (SparseMatrix, Vec<f64>) {
        let a = system(n1, n2, alpha1, kappa, &shift);
        let n = a.dim();
        (a, b[..n].to_vec())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solve_matches_dense_lu((a, b) in grid_system()) {
        let oracle = dense(&a).lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for ordering in ORDERINGS {
            let x = CholeskyFactor::new(&a, ordering).unwrap().solve(&b).unwrap();
            prop_assert!(max_abs_diff(&x, oracle.as_slice()) <= 1e-9);
        }
    }

    #[test]
    fn log_determinant_matches_dense((a, _) in grid_system()) {
        let oracle = dense(&a).cholesky().unwrap().l().diagonal().iter().map(|d| 2.0 * d.ln()).sum::<f64>();
        for ordering in ORDERINGS {
            let ld = CholeskyFactor::new(&a, ordering).unwrap().log_determinant();
            prop_assert!((ld - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn factor_reproduces_permuted_matrix((a, _) in grid_system()) {
        for ordering in ORDERINGS {
            let f = CholeskyFactor::new(&a, ordering).unwrap();
            let u = dense(f.upper());
            let pa = dense(&a.permute_symmetric(f.permutation()).unwrap());
            let err = (u.transpose() * &u - pa).abs().max();
            prop_assert!(err <= 1e-10, "{:?}: ‖UᵀU − PAPᵀ‖ = {}", ordering, err);
        }
    }

    #[test]
    fn permutation_round_trip((a, _) in grid_system(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..a.dim()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let inv = inverse_permutation(&perm).unwrap();
        let back = a.permute_symmetric(&perm).unwrap().permute_symmetric(&inv).unwrap();
        prop_assert_eq!(back.to_dense(), a.to_dense());
    }

    #[test]
    fn orderings_agree((a, b) in grid_system()) {
        let sols: Vec<Vec<f64>> = ORDERINGS
            .iter()
            .map(|&o| CholeskyFactor::new(&a, o).unwrap().solve(&b).unwrap())
            .collect();
        prop_assert!(max_abs_diff(&sols[0], &sols[1]) <= 1e-10);
        prop_assert!(max_abs_diff(&sols[0], &sols[2]) <= 1e-10);
    }

    #[test]
    fn fill_covers_the_lower_triangle((a, _) in grid_system()) {
        let lower = (a.nnz() + a.dim()) / 2;
        for ordering in ORDERINGS {
            let s = SymbolicCholesky::analyze(&a, ordering).unwrap();
            prop_assert!(s.factor_nnz() >= lower);
            prop_assert!(s.factor_nnz() <= a.dim() * (a.dim() + 1) / 2);
        }
    }

    #[test]
    fn seeded_samples_are_reproducible((a, b) in grid_system(), seed in any::<u64>()) {
        let x = sample_canonical_normal(&a, &b, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let y = sample_canonical_normal(&a, &b, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(x, y);
    }
}

#[test]
fn nested_dissection_fills_less_than_natural_on_a_large_grid() {
    let a = system(30, 30, 1.0, 1.0, &[1.0; 900]);
    let nnz = |o| SymbolicCholesky::analyze(&a, o).unwrap().factor_nnz();
    assert!(nnz(Ordering::NestedDissection) < nnz(Ordering::Natural));
}

#[test]
fn canonical_samples_have_the_dense_moments() {
    let a = system(2, 3, 0.7, 1.3, &[0.5, 1.0, 1.5, 2.0, 0.8, 1.2]);
    let b = [1.0, -0.5, 0.25, 0.0, 2.0, -1.0];
    let cov = dense(&a).try_inverse().unwrap();
    let mean = &cov * DVector::from_row_slice(&b);
    let n = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws: Vec<Vec<f64>> = (0..n).map(|_| sample_canonical_normal(&a, &b, &mut rng).unwrap()).collect();
    for i in 0..6 {
        let m = draws.iter().map(|d| d[i]).sum::<f64>() / n as f64;
        let se = (cov[(i, i)] / n as f64).sqrt();
        assert!((m - mean[i]).abs() <= 5.0 * se, "node {i}: {m} vs {}", mean[i]);
        for j in 0..=i {
            let c = draws.iter().map(|d| (d[i] - mean[i]) * (d[j] - mean[j])).sum::<f64>() / n as f64;
            let se = ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)].powi(2)) / n as f64).sqrt();
            assert!((c - cov[(i, j)]).abs() <= 5.0 * se, "cov({i},{j}): {c} vs {}", cov[(i, j)]);
        }
    }
}
