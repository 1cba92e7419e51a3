use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use dominant_features::lattice::{build_regular_q, AnisotropyWeights, Lattice};
use dominant_features::scalespace::{
    credibility_map, local_minima, select_scales, Credibility, DetailStack, NormKind, ScaleGrid, ScaleSet, Smoother,
};
use dominant_features::sparse::SparseMatrix;

fn grid_q(n1: usize, n2: usize) -> SparseMatrix {
    build_regular_q(&Lattice::full(n1, n2, 1.0).unwrap(), AnisotropyWeights::isotropic()).unwrap()
}

fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.dim(), a.dim(), &a.to_dense())
}

#[test]
fn smoothing_matches_the_dense_inverse() {
    let q = grid_q(4, 5);
    let s = Smoother::new(&q).unwrap();
    let x: Vec<f64> = (0..20).map(|i| ((i * i) % 7) as f64 - 3.0).collect();
    for lambda in [0.1, 2.0, 75.0] {
        let oracle = (DMatrix::identity(20, 20) + dense(&q) * lambda)
            .lu()
            .solve(&DVector::from_row_slice(&x))
            .unwrap();
        let sx = s.smooth(&x, lambda).unwrap();
        assert!(sx.iter().zip(oracle.iter()).all(|(a, b)| (a - b).abs() <= 1e-12));
    }
    let mean = x.iter().sum::<f64>() / 20.0;
    assert!(s.smooth(&x, f64::INFINITY).unwrap().iter().all(|v| (v - mean).abs() <= 1e-12));
    assert_eq!(s.smooth(&x, 0.0).unwrap(), x);
}

#[test]
fn constant_field_has_zero_curves_and_no_scales() {
    let s = Smoother::new(&grid_q(6, 6)).unwrap();
    let g = ScaleGrid::default();
    let c = s.norm_curves(&[2.0; 36], &g).unwrap();
    assert!(c.maximum.iter().chain(&c.euclidean).all(|v| v.abs() <= 1e-12));
    // a flat curve has no strict interior minimum
    assert_eq!(select_scales(&vec![0.0; g.len()], &g, None).unwrap().lambdas(), vec![0.0, f64::INFINITY]);
}

#[test]
fn spec_minima_example() {
    assert_eq!(local_minima(&[3.0, 1.0, 2.0, 0.5, 4.0]), vec![1, 3]);
}

prop_compose! {
    fn field()(n1 in 2usize..=8, n2 in 2usize..=8, v in prop::collection::vec(-5.0f64..5.0, 64)) -> (usize, usize, Vec<f64>) {
        (n1, n2, v[..n1 * n2].to_vec())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_log_lambda_difference((n1, n2, x) in field(), log_l in -1.0f64..3.0) {
        let s = Smoother::new(&grid_q(n1, n2)).unwrap();
        let lambda = 10f64.powf(log_l);
        let eps: f64 = 1e-4;
        let d = s.scale_derivative(&x, lambda).unwrap();
        let up = s.smooth(&x, lambda * eps.exp()).unwrap();
        let down = s.smooth(&x, lambda * (-eps).exp()).unwrap();
        let norm = NormKind::Euclidean.apply(&d);
        prop_assume!(norm > 1e-8);
        // the smooth decreases along D_λx as log λ grows
        let diff: Vec<f64> = d.iter().zip(up.iter().zip(&down)).map(|(a, (u, v))| a + (u - v) / (2.0 * eps)).collect();
        prop_assert!(NormKind::Euclidean.apply(&diff) / norm <= 1e-4);
    }

    #[test]
    fn details_sum_to_the_field((n1, n2, x) in field(), mut scales in prop::collection::vec(0.01f64..1e4, 0..5)) {
        scales.sort_by(|a, b| a.total_cmp(b));
        scales.dedup();
        let s = Smoother::new(&grid_q(n1, n2)).unwrap();
        let set = ScaleSet::new(scales, None).unwrap();
        let details = s.decompose(&x, &set).unwrap().details;
        prop_assert_eq!(details.len(), set.n_details());
        let xmax = NormKind::Maximum.apply(&x);
        prop_assert!(DetailStack::additivity_error(&details, &x) <= 1e-8 * xmax.max(1e-300));
    }

    #[test]
    fn credibility_sets_partition_the_nodes(
        draws in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 12), 20..60),
        alpha in 0.51f64..0.99,
    ) {
        let m = credibility_map(&draws, alpha).unwrap();
        let total = [Credibility::CrediblyPositive, Credibility::CrediblyNegative, Credibility::NotCredible]
            .map(|c| m.count(c))
            .iter()
            .sum::<usize>();
        prop_assert_eq!(total, 12);
        for i in 0..12 {
            let pos = draws.iter().filter(|d| d[i] > 0.0).count() as f64 / draws.len() as f64;
            let neg = draws.iter().filter(|d| d[i] < 0.0).count() as f64 / draws.len() as f64;
            let expected = if pos >= alpha {
                Credibility::CrediblyPositive
            } else if neg >= alpha {
                Credibility::CrediblyNegative
            } else {
                Credibility::NotCredible
            };
            prop_assert_eq!(m.labels[i], expected);
        }
    }

    #[test]
    fn norm_curves_are_translation_invariant((n1, n2, x) in field(), c in -10.0f64..10.0) {
        let s = Smoother::new(&grid_q(n1, n2)).unwrap();
        let g = ScaleGrid::new(-1.0, 3.0, 5).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let a = s.norm_curves(&x, &g).unwrap();
        let b = s.norm_curves(&shifted, &g).unwrap();
        for (u, v) in a.euclidean.iter().zip(&b.euclidean) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + u.abs()));
        }
    }
}
