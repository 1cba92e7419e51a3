use super::SparseError;

/// Square matrix in compressed sparse row format.
///
/// Column indices are strictly increasing within each row. Explicit zeros are
/// allowed and are part of the stored pattern; builders in this crate keep the
/// diagonal in the pattern even when its value is zero, so shifted systems
/// `a·Q + diag(d)` share the pattern of `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the layout.
    pub fn from_csr(
        dim: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        if row_ptr.len() != dim + 1 || col_idx.len() != values.len() {
            return Err(SparseError::DimensionMismatch {
                expected: dim + 1,
                found: row_ptr.len(),
            });
        }
        if row_ptr[0] != 0 || row_ptr[dim] != col_idx.len() {
            return Err(SparseError::InvalidLayout("row_ptr must start at 0 and end at nnz"));
        }
        for i in 0..dim {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(SparseError::InvalidLayout("row_ptr must be non-decreasing"));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SparseError::InvalidLayout(
                    "column indices must be strictly increasing within a row",
                ));
            }
            if cols.last().is_some_and(|&c| c >= dim) {
                return Err(SparseError::InvalidLayout("column index out of range"));
            }
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Assembles a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        dim: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        let mut counts = vec![0usize; dim + 1];
        for &(i, j, _) in triplets {
            if i >= dim || j >= dim {
                return Err(SparseError::IndexOutOfRange { index: i.max(j), dim });
            }
            counts[i + 1] += 1;
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..dim {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds a matrix from a dense row-major array, keeping the diagonal
    /// and every non-zero off-diagonal entry.
    pub fn from_dense(dim: usize, dense: &[f64]) -> Result<Self, SparseError> {
        if dense.len() != dim * dim {
            return Err(SparseError::DimensionMismatch {
                expected: dim * dim,
                found: dense.len(),
            });
        }
        let mut trip = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let v = dense[i * dim + j];
                if i == j || v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(dim, &trip)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries (explicit zeros included).
    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Entry `(i, j)`, zero when outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Storage cost as (reals, integers): `w` reals and `w + n + 1` indices
    /// (plus the dimension itself).
    pub fn storage(&self) -> (usize, usize) {
        (self.nnz(), self.nnz() + self.dim + 2)
    }

    /// True when the pattern and values are exactly symmetric.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| {
                let (cj, vj) = self.row(j);
                matches!(cj.binary_search(&i), Ok(p) if vj[p] == v)
            })
        })
    }

    /// Sum of the entries of each row.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, SparseError> {
        let mut out = vec![0.0; self.dim];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<(), SparseError> {
        if v.len() != self.dim || out.len() != self.dim {
            return Err(SparseError::DimensionMismatch {
                expected: self.dim,
                found: v.len().min(out.len()),
            });
        }
        for (i, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *o = cols.iter().zip(vals).map(|(&j, &a)| a * v[j]).sum();
        }
        Ok(())
    }

    /// Quadratic form `vᵀ A v`.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64, SparseError> {
        if v.len() != self.dim {
            return Err(SparseError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| {
                let (cols, vals) = self.row(i);
                v[i] * cols.iter().zip(vals).map(|(&j, &a)| a * v[j]).sum::<f64>()
            })
            .sum())
    }

    /// `scale·A + diag(shift)` on the pattern of `A`; the diagonal must be
    /// part of the pattern.
    pub fn scaled_plus_diagonal(&self, scale: f64, shift: &[f64]) -> Result<Self, SparseError> {
        if shift.len() != self.dim {
            return Err(SparseError::DimensionMismatch {
                expected: self.dim,
                found: shift.len(),
            });
        }
        let mut values: Vec<f64> = self.values.iter().map(|v| scale * v).collect();
        for (i, &d) in shift.iter().enumerate() {
            let (cols, _) = self.row(i);
            let p = cols
                .binary_search(&i)
                .map_err(|_| SparseError::InvalidLayout("diagonal missing from pattern"))?;
            values[self.row_ptr[i] + p] += d;
        }
        Ok(Self {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values,
        })
    }

    /// Same matrix with every diagonal entry present in the pattern.
    pub fn with_full_diagonal(&self) -> Self {
        if (0..self.dim).all(|i| self.row(i).0.binary_search(&i).is_ok()) {
            return self.clone();
        }
        let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.dim);
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            trip.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, v)));
            trip.push((i, i, 0.0));
        }
        Self::from_triplets(self.dim, &trip).expect("indices already validated")
    }

    /// True when `other` stores exactly the same pattern.
    pub fn same_pattern(&self, other: &SparseMatrix) -> bool {
        self.dim == other.dim && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// Dense row-major copy; intended for small matrices and tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim * self.dim];
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i * self.dim + j] = v;
            }
        }
        d
    }

    /// Symmetric permutation `C = PᵀAP` with `C[k][l] = A[perm[k]][perm[l]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<Self, SparseError> {
        let inv = super::ordering::inverse_permutation(perm)?;
        if perm.len() != self.dim {
            return Err(SparseError::DimensionMismatch {
                expected: self.dim,
                found: perm.len(),
            });
        }
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                trip.push((inv[i], inv[j], v));
            }
        }
        Self::from_triplets(self.dim, &trip)
    }

    /// Symmetric adjacency lists of the off-diagonal pattern.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.dim];
        for (i, a) in adj.iter_mut().enumerate() {
            a.extend(self.row(i).0.iter().copied().filter(|&j| j != i));
        }
        // symmetrize in case the pattern is not
        for i in 0..self.dim {
            for k in 0..adj[i].len() {
                let j = adj[i][k];
                if adj[j].binary_search(&i).is_err() {
                    let pos = adj[j].binary_search(&i).unwrap_err();
                    adj[j].insert(pos, i);
                }
            }
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = SparseMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 3.0)]).unwrap();
        assert_eq!(a.row(0).0, &[0, 1]);
        assert_eq!(a.get(0, 1), 4.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.row_ptr(), &[0, 2, 2]);
    }

    #[test]
    fn rejects_bad_layout() {
        assert!(SparseMatrix::from_csr(2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(SparseMatrix::from_triplets(2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn matvec_identity_and_mismatch() {
        let id = SparseMatrix::identity(3);
        assert_eq!(id.matvec(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        assert!(matches!(
            id.matvec(&[1.0]),
            Err(SparseError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn storage_counts() {
        let a = SparseMatrix::identity(4);
        assert_eq!(a.storage(), (4, 4 + 4 + 2));
    }

    #[test]
    fn permutation_moves_entries() {
        let a = SparseMatrix::from_dense(3, &[4.0, 1.0, 0.0, 1.0, 5.0, 2.0, 0.0, 2.0, 6.0]).unwrap();
        let perm = [2, 0, 1];
        let c = a.permute_symmetric(&perm).unwrap();
        for k in 0..3 {
            for l in 0..3 {
                assert_eq!(c.get(k, l), a.get(perm[k], perm[l]));
            }
        }
        assert!(c.is_symmetric());
    }

    #[test]
    fn shifted_system_keeps_pattern() {
        let a = SparseMatrix::from_dense(2, &[1.0, -1.0, -1.0, 1.0]).unwrap();
        let s = a.scaled_plus_diagonal(2.0, &[1.0, 3.0]).unwrap();
        assert!(s.same_pattern(&a));
        assert_eq!(s.to_dense(), vec![3.0, -2.0, -2.0, 5.0]);
    }
}
