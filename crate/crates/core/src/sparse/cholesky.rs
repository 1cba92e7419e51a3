//! Up-looking sparse Cholesky factorization `TᵀT = PᵀAP`.
//!
//! The symbolic phase (ordering, elimination tree, row patterns and column
//! counts) depends only on the sparsity pattern of `A` and is shared by every
//! numeric factorization of a matrix with the same pattern.

use std::sync::Arc;

use super::ordering::{inverse_permutation, Ordering};
use super::{SparseError, SparseMatrix};

const NONE: usize = usize::MAX;

/// Relative pivot tolerance: a pivot at or below `PIVOT_TOL · max|diag(A)|`
/// rejects the matrix.
pub const PIVOT_TOL: f64 = 1e-12;

/// Pattern-only analysis of a symmetric matrix.
#[derive(Debug)]
pub struct SymbolicCholesky {
    dim: usize,
    perm: Vec<usize>,
    // pattern of the analysed matrix, used to check numeric inputs
    pattern_row_ptr: Vec<usize>,
    pattern_col_idx: Vec<usize>,
    // lower triangle (by rows) of the permuted matrix, as indices into A's values
    upper_ptr: Vec<usize>,
    upper_col: Vec<usize>,
    upper_src: Vec<usize>,
    // row patterns of the factor's transpose in topological order
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    // column pointers of the factor (rows of T)
    col_ptr: Vec<usize>,
    parent: Vec<usize>,
}

impl SymbolicCholesky {
    pub fn analyze(a: &SparseMatrix, ordering: Ordering) -> Result<Arc<Self>, SparseError> {
        let perm = ordering.permutation(a);
        Self::analyze_with_permutation(a, perm)
    }

    pub fn analyze_with_permutation(
        a: &SparseMatrix,
        perm: Vec<usize>,
    ) -> Result<Arc<Self>, SparseError> {
        let n = a.dim();
        if n == 0 {
            return Err(SparseError::Empty);
        }
        if perm.len() != n {
            return Err(SparseError::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let inv = inverse_permutation(&perm)?;

        // permuted lower triangle by rows: row k holds columns l <= k
        let mut rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for i in 0..n {
            let start = a.row_ptr()[i];
            let (cols, _) = a.row(i);
            for (off, &j) in cols.iter().enumerate() {
                let (k, l) = (inv[i], inv[j]);
                if l <= k {
                    rows[k].push((l, start + off));
                }
            }
        }
        let mut upper_ptr = Vec::with_capacity(n + 1);
        let mut upper_col = Vec::new();
        let mut upper_src = Vec::new();
        upper_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            for &(l, src) in r.iter() {
                upper_col.push(l);
                upper_src.push(src);
            }
            upper_ptr.push(upper_col.len());
        }

        // elimination tree with path compression
        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for k in 0..n {
            for &l in &upper_col[upper_ptr[k]..upper_ptr[k + 1]] {
                let mut i = l;
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        // row patterns via elimination-tree reach
        let mut mark = vec![NONE; n];
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut counts = vec![1usize; n];
        let mut stack = Vec::new();
        let mut path = Vec::new();
        row_ptr.push(0);
        for k in 0..n {
            mark[k] = k;
            stack.clear();
            for &l in &upper_col[upper_ptr[k]..upper_ptr[k + 1]] {
                let mut i = l;
                path.clear();
                while i != NONE && mark[i] != k {
                    path.push(i);
                    mark[i] = k;
                    i = parent[i];
                }
                // reversed so that ancestors come after descendants once we flip
                stack.extend(path.iter().rev());
            }
            // stack holds each path root-first; the final reversal yields a
            // topological (descendant before ancestor) order
            let start = row_idx.len();
            row_idx.extend(stack.iter().rev());
            for &j in &row_idx[start..] {
                counts[j] += 1;
            }
            row_ptr.push(row_idx.len());
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for &c in &counts {
            col_ptr.push(col_ptr.last().unwrap() + c);
        }

        Ok(Arc::new(Self {
            dim: n,
            perm,
            pattern_row_ptr: a.row_ptr().to_vec(),
            pattern_col_idx: a.col_idx().to_vec(),
            upper_ptr,
            upper_col,
            upper_src,
            row_ptr,
            row_idx,
            col_ptr,
            parent,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Non-zero count of the factor, diagonal included.
    pub fn factor_nnz(&self) -> usize {
        *self.col_ptr.last().unwrap()
    }

    pub fn elimination_tree(&self) -> &[usize] {
        &self.parent
    }

    fn matches(&self, a: &SparseMatrix) -> bool {
        a.dim() == self.dim
            && a.row_ptr() == self.pattern_row_ptr.as_slice()
            && a.col_idx() == self.pattern_col_idx.as_slice()
    }

    /// Numeric factorization of a matrix sharing the analysed pattern.
    pub fn factor(self: &Arc<Self>, a: &SparseMatrix) -> Result<CholeskyFactor, SparseError> {
        if !self.matches(a) {
            return Err(SparseError::PatternMismatch);
        }
        let n = self.dim;
        let av = a.values();
        let max_diag = a.diag().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let tol = PIVOT_TOL * max_diag;

        let nnz = self.factor_nnz();
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0f64; nnz];
        let mut next: Vec<usize> = self.col_ptr[..n].to_vec();
        let mut x = vec![0.0f64; n];

        for k in 0..n {
            for p in self.upper_ptr[k]..self.upper_ptr[k + 1] {
                x[self.upper_col[p]] += av[self.upper_src[p]];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &self.row_idx[self.row_ptr[k]..self.row_ptr[k + 1]] {
                let head = self.col_ptr[i];
                let lki = x[i] / lx[head];
                x[i] = 0.0;
                let end = next[i];
                for p in head + 1..end {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                li[end] = k;
                lx[end] = lki;
                next[i] = end + 1;
            }
            if !(d > tol) || !d.is_finite() {
                return Err(SparseError::NotPositiveDefinite { pivot: k, value: d });
            }
            let p = next[k];
            li[p] = k;
            lx[p] = d.sqrt();
            next[k] = p + 1;
        }

        let upper = SparseMatrix::from_csr(n, self.col_ptr.clone(), li, lx)
            .expect("factor layout is valid by construction");
        Ok(CholeskyFactor {
            symbolic: Arc::clone(self),
            upper,
        })
    }
}

/// Cholesky factor `T` (upper triangular, CSR) with its fill-reducing permutation.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    symbolic: Arc<SymbolicCholesky>,
    upper: SparseMatrix,
}

impl CholeskyFactor {
    /// One-shot analysis plus factorization.
    pub fn new(a: &SparseMatrix, ordering: Ordering) -> Result<Self, SparseError> {
        SymbolicCholesky::analyze(a, ordering)?.factor(a)
    }

    pub fn dim(&self) -> usize {
        self.symbolic.dim
    }

    pub fn permutation(&self) -> &[usize] {
        &self.symbolic.perm
    }

    /// Upper-triangular factor `T` with `TᵀT = PᵀAP`.
    pub fn upper(&self) -> &SparseMatrix {
        &self.upper
    }

    pub fn symbolic(&self) -> &Arc<SymbolicCholesky> {
        &self.symbolic
    }

    pub fn log_determinant(&self) -> f64 {
        2.0 * (0..self.dim())
            .map(|i| self.upper.values()[self.upper.row_ptr()[i]].ln())
            .sum::<f64>()
    }

    fn check_len(&self, len: usize) -> Result<(), SparseError> {
        if len != self.dim() {
            return Err(SparseError::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    /// Solves `Tᵀ y = y` in place (forward substitution).
    fn forward(&self, y: &mut [f64]) {
        let (ptr, idx, val) = (self.upper.row_ptr(), self.upper.col_idx(), self.upper.values());
        for j in 0..self.dim() {
            let head = ptr[j];
            let yj = y[j] / val[head];
            y[j] = yj;
            for p in head + 1..ptr[j + 1] {
                y[idx[p]] -= val[p] * yj;
            }
        }
    }

    /// Solves `T z = z` in place (backward substitution).
    fn backward(&self, z: &mut [f64]) {
        let (ptr, idx, val) = (self.upper.row_ptr(), self.upper.col_idx(), self.upper.values());
        for j in (0..self.dim()).rev() {
            let head = ptr[j];
            let mut s = z[j];
            for p in head + 1..ptr[j + 1] {
                s -= val[p] * z[idx[p]];
            }
            z[j] = s / val[head];
        }
    }

    fn gather(&self, b: &[f64]) -> Vec<f64> {
        self.permutation().iter().map(|&p| b[p]).collect()
    }

    fn scatter(&self, w: &[f64], out: &mut [f64]) {
        for (&p, &v) in self.permutation().iter().zip(w) {
            out[p] = v;
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SparseError> {
        let mut out = vec![0.0; b.len()];
        self.solve_into(b, &mut out)?;
        Ok(out)
    }

    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) -> Result<(), SparseError> {
        self.check_len(b.len())?;
        self.check_len(out.len())?;
        let mut w = self.gather(b);
        self.forward(&mut w);
        self.backward(&mut w);
        self.scatter(&w, out);
        Ok(())
    }

    /// Returns `A⁻¹ b + A^{-1/2} z` for a standard-normal vector `z` given in
    /// elimination order: one forward and one backward solve.
    pub fn solve_perturbed(&self, b: &[f64], z: &[f64]) -> Result<Vec<f64>, SparseError> {
        self.check_len(b.len())?;
        self.check_len(z.len())?;
        let mut w = self.gather(b);
        self.forward(&mut w);
        for (wi, zi) in w.iter_mut().zip(z) {
            *wi += zi;
        }
        self.backward(&mut w);
        let mut out = vec![0.0; w.len()];
        self.scatter(&w, &mut out);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, d: f64, o: f64) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, d));
            if i + 1 < n {
                t.push((i, i + 1, o));
                t.push((i + 1, i, o));
            }
        }
        SparseMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn scalar_square_root() {
        let a = SparseMatrix::diagonal(&[4.0]);
        let f = CholeskyFactor::new(&a, Ordering::Natural).unwrap();
        assert_eq!(f.upper().values(), &[2.0]);
        assert_eq!(f.permutation(), &[0]);
    }

    #[test]
    fn identity_factor_is_identity() {
        for ord in [Ordering::Natural, Ordering::BandwidthReducing, Ordering::NestedDissection] {
            let f = CholeskyFactor::new(&SparseMatrix::identity(5), ord).unwrap();
            assert_eq!(f.upper().nnz(), 5);
            assert!(f.upper().values().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn diagonal_solve() {
        let f = CholeskyFactor::new(&SparseMatrix::diagonal(&[2.0, 4.0]), Ordering::Natural).unwrap();
        let x = f.solve(&[2.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite_and_singular() {
        let a = SparseMatrix::from_dense(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            CholeskyFactor::new(&a, Ordering::Natural),
            Err(SparseError::NotPositiveDefinite { .. })
        ));
        // random-walk structure matrix is singular
        let r = tridiag(4, 2.0, -1.0)
            .scaled_plus_diagonal(1.0, &[-1.0, 0.0, 0.0, -1.0])
            .unwrap();
        assert!(CholeskyFactor::new(&r, Ordering::Natural).is_err());
    }

    #[test]
    fn pattern_mismatch_is_reported() {
        let a = tridiag(3, 4.0, 1.0);
        let sym = SymbolicCholesky::analyze(&a, Ordering::Natural).unwrap();
        assert!(matches!(
            sym.factor(&SparseMatrix::identity(3)),
            Err(SparseError::PatternMismatch)
        ));
    }

    #[test]
    fn solve_dimension_mismatch() {
        let f = CholeskyFactor::new(&tridiag(3, 4.0, 1.0), Ordering::Natural).unwrap();
        assert!(matches!(
            f.solve(&[1.0, 2.0]),
            Err(SparseError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tridiagonal_has_no_fill() {
        let f = CholeskyFactor::new(&tridiag(50, 4.0, -1.0), Ordering::Natural).unwrap();
        assert_eq!(f.upper().nnz(), 50 + 49);
        let x = f.solve(&vec![1.0; 50]).unwrap();
        let r = tridiag(50, 4.0, -1.0).matvec(&x).unwrap();
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }
}
