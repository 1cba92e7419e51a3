use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dominant_features::diversity::{
    community, fdiv, feve, frich, index_map, mst_branch_lengths, DiversityIndex, TraitStack,
};
use dominant_features::lattice::Lattice;

fn brute_community(lat: &Lattice, center: usize, radius: f64) -> Vec<usize> {
    let h = lat.spacing();
    let (r0, c0) = lat.row_col(lat.active_nodes()[center]);
    let mut out = Vec::new();
    for (s, &g) in lat.active_nodes().iter().enumerate() {
        let (r, c) = lat.row_col(g);
        let d = h * (r as f64 - r0 as f64).hypot(c as f64 - c0 as f64);
        if d <= radius + 1e-9 && lat.observed_mask()[g] {
            out.push(s);
        }
    }
    out
}

/// Kruskal over the complete graph with a union-find.
fn kruskal_total(points: &[Vec<f64>]) -> f64 {
    let c = points.len();
    let mut edges = Vec::new();
    for i in 0..c {
        for j in i + 1..c {
            let d = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            edges.push((d, i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..c).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut total = 0.0;
    for (d, i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            total += d;
        }
    }
    total
}

/// Centroid-distance divergence computed directly from its definition.
fn fdiv_direct(points: &[Vec<f64>]) -> f64 {
    let c = points.len() as f64;
    let t = points[0].len();
    let g: Vec<f64> = (0..t).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / c).collect();
    let dg: Vec<f64> = points
        .iter()
        .map(|p| p.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .collect();
    let mean = dg.iter().sum::<f64>() / c;
    let spread = dg.iter().map(|d| (d - mean).abs()).sum::<f64>() / c;
    mean / (spread + mean)
}

fn points(t: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, t), 3..=12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn community_matches_brute_force(
        n1 in 2usize..=9,
        n2 in 2usize..=9,
        center in 0usize..81,
        radius in 0.0f64..4.0,
        mask in prop::collection::vec(prop::bool::weighted(0.85), 81),
    ) {
        let n = n1 * n2;
        let center = center % n;
        let mut observed = mask[..n].to_vec();
        observed[center] = true;
        let lat = Lattice::with_masks(n1, n2, 0.5, vec![true; n], observed).unwrap();
        let mut got = community(&lat, center, radius * 0.5).unwrap().members;
        got.sort_unstable();
        prop_assert_eq!(got, brute_community(&lat, center, radius * 0.5));
    }

    #[test]
    fn prim_matches_kruskal(pts in points(3)) {
        let prim: f64 = mst_branch_lengths(&pts).iter().sum();
        prop_assert_eq!(mst_branch_lengths(&pts).len(), pts.len() - 1);
        prop_assert!((prim - kruskal_total(&pts)).abs() <= 1e-12 * (1.0 + prim));
    }

    #[test]
    fn fdiv_matches_definition(pts in points(2)) {
        let v = fdiv(&pts);
        prop_assume!(!v.degenerate);
        prop_assert!((v.value - fdiv_direct(&pts)).abs() <= 1e-12);
    }

    #[test]
    fn indices_are_scale_invariant_and_bounded(pts in points(3), s in 0.1f64..10.0) {
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * s).collect()).collect();
        for (a, b) in [(fdiv(&pts), fdiv(&scaled)), (feve(&pts), feve(&scaled))] {
            prop_assert_eq!(a.degenerate, b.degenerate);
            if !a.degenerate {
                prop_assert!((0.0..=1.0).contains(&a.value));
                prop_assert!((a.value - b.value).abs() <= 1e-9);
            }
        }
        let (r, rs) = (frich(&pts).unwrap(), frich(&scaled).unwrap());
        if !r.degenerate {
            prop_assert!((rs.value - r.value * s.powi(3)).abs() <= 1e-9 * rs.value.max(1e-12));
        }
    }

    #[test]
    fn hull_volume_ignores_interior_points(pts in points(3), w in prop::collection::vec(0.0f64..1.0, 4)) {
        let r = frich(&pts).unwrap();
        prop_assume!(!r.degenerate);
        // a convex combination of four input points lies inside the hull
        let total: f64 = w.iter().sum::<f64>() + 1e-9;
        let inner: Vec<f64> = (0..3).map(|k| (0..4).map(|i| w[i] / total * pts[i % pts.len()][k]).sum::<f64>() + (1e-9 / total) * pts[0][k]).collect();
        let mut more = pts.clone();
        more.push(inner);
        prop_assert!((frich(&more).unwrap().value - r.value).abs() <= 1e-9 * r.value.max(1.0));
    }
}

#[test]
fn hand_computed_cases() {
    let p = |v: &[&[f64]]| v.iter().map(|x| x.to_vec()).collect::<Vec<_>>();
    let tet = frich(&p(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]])).unwrap();
    assert!((tet.value - 1.0 / 6.0).abs() <= 1e-12);
    assert!((feve(&p(&[&[0.0], &[1.0], &[2.0]])).value - 1.0).abs() <= 1e-12);
    assert!((feve(&p(&[&[0.0], &[1.0], &[4.0]])).value - 0.5).abs() <= 1e-12);
    assert!((fdiv(&p(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 3f64.sqrt()]])).value - 1.0).abs() <= 1e-12);
    assert!((fdiv(&p(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 4.0]])).value - 0.75).abs() <= 1e-12);
    assert!((fdiv(&p(&[&[1.0, 5.0], &[3.0, -1.0]])).value - 1.0).abs() <= 1e-12);
}

#[test]
fn richness_grows_with_radius_everywhere() {
    let lat = Lattice::full(10, 10, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let traits: Vec<Vec<f64>> = (0..3).map(|_| (0..100).map(|_| rng.gen::<f64>()).collect()).collect();
    let stack = TraitStack::new(lat, traits).unwrap();
    let radii = [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0];
    let maps: Vec<_> = radii.iter().map(|&r| index_map(&stack, r, DiversityIndex::FRich).unwrap()).collect();
    for w in maps.windows(2) {
        for i in 0..100 {
            assert!(w[1].value_or_zero(i) >= w[0].value_or_zero(i) - 1e-12, "pixel {i}");
            assert!(w[1].community_sizes[i] >= w[0].community_sizes[i]);
        }
    }
}
