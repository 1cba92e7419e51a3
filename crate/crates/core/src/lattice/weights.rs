use std::collections::HashSet;

use super::{AnisotropyWeights, Lattice, LatticeError};
use crate::sparse::SparseMatrix;

/// Spatial-weight matrix together with the nodes left without neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub matrix: SparseMatrix,
    /// Nodes whose row is entirely zero.
    pub isolated: Vec<usize>,
}

/// Assembles a zero-row-sum matrix from its off-diagonal entries; each
/// diagonal is the negated sum of its row's off-diagonals, the pattern always
/// holds the diagonal.
fn laplacian_from_offdiag(n: usize, rows: &[Vec<(usize, f64)>]) -> WeightMatrix {
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut isolated = Vec::new();
    row_ptr.push(0);
    for (i, row) in rows.iter().enumerate() {
        debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        let diag = -row.iter().map(|&(_, v)| v).sum::<f64>();
        let diag = if diag == 0.0 { 0.0 } else { diag };
        if row.iter().all(|&(_, v)| v == 0.0) {
            isolated.push(i);
        }
        let split = row.partition_point(|&(j, _)| j < i);
        for &(j, v) in &row[..split] {
            col_idx.push(j);
            values.push(v);
        }
        col_idx.push(i);
        values.push(diag);
        for &(j, v) in &row[split..] {
            col_idx.push(j);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    WeightMatrix {
        matrix: SparseMatrix::from_csr(n, row_ptr, col_idx, values)
            .expect("laplacian layout is valid by construction"),
        isolated,
    }
}

/// Structure matrix of a first-order random walk of length `n`.
pub fn structure_matrix(n: usize) -> Result<SparseMatrix, LatticeError> {
    if n < 2 {
        return Err(LatticeError::StructureTooSmall(n));
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut r = Vec::with_capacity(2);
            if i > 0 {
                r.push((i - 1, -1.0));
            }
            if i + 1 < n {
                r.push((i + 1, -1.0));
            }
            r
        })
        .collect();
    Ok(laplacian_from_offdiag(n, &rows).matrix)
}

/// Spatial-weight matrix of the full `n1 × n2` grid (every node active),
/// coupling vertical neighbours with `alpha1` and horizontal neighbours with
/// `alpha2`.
pub fn build_regular_q(lat: &Lattice, w: AnisotropyWeights) -> Result<SparseMatrix, LatticeError> {
    let (n1, n2) = (lat.n1(), lat.n2());
    if n1 < 2 || n2 < 2 {
        return Err(LatticeError::GridTooSmall { n1, n2 });
    }
    Ok(grid_weights(n1, n2, w).matrix)
}

fn grid_weights(n1: usize, n2: usize, w: AnisotropyWeights) -> WeightMatrix {
    let n = n1 * n2;
    let mut rows = Vec::with_capacity(n);
    for r in 0..n1 {
        for c in 0..n2 {
            let i = r * n2 + c;
            let mut row = Vec::with_capacity(4);
            if r > 0 {
                row.push((i - n2, -w.alpha1));
            }
            if c > 0 {
                row.push((i - 1, -w.alpha2));
            }
            if c + 1 < n2 {
                row.push((i + 1, -w.alpha2));
            }
            if r + 1 < n1 {
                row.push((i + n2, -w.alpha1));
            }
            rows.push(row);
        }
    }
    laplacian_from_offdiag(n, &rows)
}

/// Restricts a full-grid matrix to the active nodes of `lat` and resets each
/// diagonal so that row sums vanish.
pub fn mask_q(q: &SparseMatrix, lat: &Lattice) -> Result<WeightMatrix, LatticeError> {
    if q.dim() != lat.grid_size() {
        return Err(LatticeError::DimensionMismatch {
            expected: lat.grid_size(),
            found: q.dim(),
        });
    }
    if lat.is_fully_active() {
        let isolated = (0..q.dim())
            .filter(|&i| q.row(i).1.iter().all(|&v| v == 0.0))
            .collect();
        return Ok(WeightMatrix {
            matrix: q.clone(),
            isolated,
        });
    }
    let rows: Vec<Vec<(usize, f64)>> = lat
        .active_nodes()
        .iter()
        .map(|&g| {
            let (cols, vals) = q.row(g);
            cols.iter()
                .zip(vals)
                .filter(|(&j, _)| j != g)
                .filter_map(|(&j, &v)| lat.slot(j).map(|s| (s, v)))
                .filter(|&(_, v)| v != 0.0)
                .collect()
        })
        .collect();
    Ok(laplacian_from_offdiag(lat.n_active(), &rows))
}

/// Graph-Laplacian spatial-weight matrix of an arbitrary adjacency graph.
pub fn build_adjacency_q(
    n_nodes: usize,
    edges: &[(usize, usize)],
    weights: Option<&[f64]>,
) -> Result<WeightMatrix, LatticeError> {
    if let Some(w) = weights {
        if w.len() != edges.len() {
            return Err(LatticeError::WeightCount {
                expected: edges.len(),
                found: w.len(),
            });
        }
    }
    let mut seen = HashSet::with_capacity(edges.len());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_nodes];
    for (e, &(i, j)) in edges.iter().enumerate() {
        for idx in [i, j] {
            if idx >= n_nodes {
                return Err(LatticeError::IndexOutOfRange { index: idx, n: n_nodes });
            }
        }
        if i == j {
            return Err(LatticeError::SelfLoop(i));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(LatticeError::DuplicateEdge(i, j));
        }
        let wt = weights.map_or(1.0, |w| w[e]);
        if !(wt > 0.0 && wt.is_finite()) {
            return Err(LatticeError::InvalidWeight(wt));
        }
        rows[i].push((j, -wt));
        rows[j].push((i, -wt));
    }
    for r in rows.iter_mut() {
        r.sort_by_key(|&(j, _)| j);
    }
    Ok(laplacian_from_offdiag(n_nodes, &rows))
}

/// Connected components of the off-diagonal graph of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub labels: Vec<usize>,
    pub count: usize,
}

impl Components {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.count];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Per-component mean broadcast back to every node.
    pub fn mean_field(&self, x: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.count];
        for (&l, &v) in self.labels.iter().zip(x) {
            sums[l] += v;
        }
        let sizes = self.sizes();
        for (s, &c) in sums.iter_mut().zip(&sizes) {
            *s /= c as f64;
        }
        self.labels.iter().map(|&l| sums[l]).collect()
    }
}

pub fn connected_components(q: &SparseMatrix) -> Components {
    let n = q.dim();
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if labels[s] != usize::MAX {
            continue;
        }
        labels[s] = count;
        stack.push(s);
        while let Some(u) = stack.pop() {
            let (cols, vals) = q.row(u);
            for (&v, &a) in cols.iter().zip(vals) {
                if v != u && a != 0.0 && labels[v] == usize::MAX {
                    labels[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    Components { labels, count }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_matrix_small() {
        assert_eq!(structure_matrix(2).unwrap().to_dense(), vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(
            structure_matrix(3).unwrap().to_dense(),
            vec![1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]
        );
        assert!(structure_matrix(1).is_err());
        for n in 2..12 {
            let r = structure_matrix(n).unwrap();
            assert!(r.matvec(&vec![1.0; n]).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn two_by_two_grid() {
        let lat = Lattice::full(2, 2, 1.0).unwrap();
        let q = build_regular_q(&lat, AnisotropyWeights::isotropic()).unwrap();
        assert_eq!(q.diag(), vec![2.0; 4]);
        assert_eq!(q.matvec(&[1.0; 4]).unwrap(), vec![0.0; 4]);
        assert_eq!(q.get(0, 1), -1.0);
        assert_eq!(q.get(0, 2), -1.0);
        assert_eq!(q.get(0, 3), 0.0);
    }

    #[test]
    fn one_axis_coupling_is_block_diagonal_per_column() {
        let lat = Lattice::full(3, 3, 1.0).unwrap();
        let q = build_regular_q(&lat, AnisotropyWeights::new(2.0, 0.0).unwrap()).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                if q.get(i, j) != 0.0 {
                    assert_eq!(i % 3, j % 3, "coupling across columns at ({i},{j})");
                }
            }
        }
        assert_eq!(q.get(4, 1), -2.0);
    }

    #[test]
    fn plus_shaped_mask() {
        let lat = Lattice::full(3, 3, 1.0).unwrap();
        let q = build_regular_q(&lat, AnisotropyWeights::isotropic()).unwrap();
        let mut active = vec![true; 9];
        for g in [0, 2, 6, 8] {
            active[g] = false;
        }
        let masked_lat = Lattice::with_masks(3, 3, 1.0, active.clone(), active).unwrap();
        let m = mask_q(&q, &masked_lat).unwrap();
        assert!(m.isolated.is_empty());
        // slots: 1,3,4,5,7 -> centre is slot 2
        assert_eq!(m.matrix.diag(), vec![1.0, 1.0, 4.0, 1.0, 1.0]);
        assert!(m.matrix.row_sums().iter().all(|&s| s.abs() <= 1e-12));
        assert!(m.matrix.is_symmetric());
    }

    #[test]
    fn identity_mask_is_bit_identical() {
        let lat = Lattice::full(4, 5, 1.0).unwrap();
        let q = build_regular_q(&lat, AnisotropyWeights::new(1.3, 0.7).unwrap()).unwrap();
        assert_eq!(mask_q(&q, &lat).unwrap().matrix, q);
    }

    #[test]
    fn isolated_node_reported() {
        let lat = Lattice::full(3, 3, 1.0).unwrap();
        let q = build_regular_q(&lat, AnisotropyWeights::isotropic()).unwrap();
        // keep the centre row plus the isolated corner 0
        let mut active = vec![false; 9];
        for g in [0, 4, 5] {
            active[g] = true;
        }
        let ml = Lattice::with_masks(3, 3, 1.0, active.clone(), active).unwrap();
        let m = mask_q(&q, &ml).unwrap();
        assert_eq!(m.isolated, vec![0]);
        assert_eq!(connected_components(&m.matrix).count, 2);
    }

    #[test]
    fn adjacency_cases() {
        let path = build_adjacency_q(3, &[(0, 1), (1, 2)], None).unwrap();
        assert_eq!(path.matrix, structure_matrix(3).unwrap());
        let tri = build_adjacency_q(3, &[(0, 1), (1, 2), (2, 0)], None).unwrap();
        assert_eq!(tri.matrix.diag(), vec![2.0; 3]);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(tri.matrix.get(i, j), -1.0);
                }
            }
        }
        let empty = build_adjacency_q(3, &[], None).unwrap();
        assert_eq!(empty.isolated, vec![0, 1, 2]);
        assert!(empty.matrix.values().iter().all(|&v| v == 0.0));
        assert_eq!(
            build_adjacency_q(3, &[(1, 1)], None),
            Err(LatticeError::SelfLoop(1))
        );
        assert_eq!(
            build_adjacency_q(3, &[(0, 1), (1, 0)], None),
            Err(LatticeError::DuplicateEdge(1, 0))
        );
        assert!(matches!(
            build_adjacency_q(3, &[(0, 3)], None),
            Err(LatticeError::IndexOutOfRange { .. })
        ));
        let weighted = build_adjacency_q(2, &[(0, 1)], Some(&[2.5])).unwrap();
        assert_eq!(weighted.matrix.to_dense(), vec![2.5, -2.5, -2.5, 2.5]);
    }

    #[test]
    fn component_means() {
        let w = build_adjacency_q(4, &[(0, 1), (2, 3)], None).unwrap();
        let c = connected_components(&w.matrix);
        assert_eq!(c.count, 2);
        assert_eq!(c.mean_field(&[1.0, 3.0, 10.0, 20.0]), vec![2.0, 2.0, 15.0, 15.0]);
    }
}
