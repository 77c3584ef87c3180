//! Compressed-row sparse matrices and the direct solver behind every FE solve.

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::MatMut;

use crate::error::{Error, Result};

/// CSR matrix. Column indices within a row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates (row, col, value) entries; duplicates are summed on finalize.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn with_capacity(rows: usize, cols: usize, cap: usize) -> Self {
        Self { rows, cols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.entries.push((row, col, value));
    }

    pub fn finalize(mut self) -> SparseMatrix {
        // stable: duplicates are summed in insertion order
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { rows: self.rows, cols: self.cols, row_ptr, col_idx, values }
    }
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        Self { rows: n, cols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

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

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Same pattern, all values zero.
    pub fn zeroed_like(&self) -> Self {
        Self { values: vec![0.0; self.values.len()], ..self.clone() }
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Position of (row, col) in the value array.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let start = self.row_ptr[row];
        let end = self.row_ptr[row + 1];
        self.col_idx[start..end].binary_search(&col).ok().map(|k| start + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |k| self.values[k])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "sparse matvec dimension mismatch");
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `A^T x`
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "sparse transpose matvec dimension mismatch");
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
        y
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            let mut r = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.values[k] * y[self.col_idx[k]];
            }
            s += xi * r;
        }
        s
    }

    pub fn transpose(&self) -> Self {
        let mut b = TripletBuilder::with_capacity(self.cols, self.rows, self.nnz());
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                b.add(j, i, v);
            }
        }
        b.finalize()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest |a_ij - a_ji| over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    fn check_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::precondition(format!(
                "sparse solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Rows or columns without any nonzero make the matrix structurally singular.
    fn structural_check(&self) -> Result<()> {
        let mut col_seen = vec![false; self.cols];
        for i in 0..self.rows {
            let mut any = false;
            for (j, v) in self.row_entries(i) {
                if v != 0.0 {
                    any = true;
                    col_seen[j] = true;
                }
            }
            if !any {
                return Err(Error::Singular {
                    row: i,
                    detail: "empty row (missing constraint or disconnected mesh?)".into(),
                });
            }
        }
        if let Some(j) = col_seen.iter().position(|s| !s) {
            return Err(Error::Singular {
                row: j,
                detail: "empty column (missing constraint or disconnected mesh?)".into(),
            });
        }
        Ok(())
    }
}

/// Symbolic LU analysis (fill-reducing ordering) reusable for every matrix
/// sharing one sparsity pattern.
#[derive(Debug, Clone)]
pub struct SparseLuSymbolic {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    symbolic: SymbolicLu<usize>,
}

impl SparseLuSymbolic {
    pub fn new(pattern: &SparseMatrix) -> Result<Self> {
        pattern.check_square()?;
        // a CSR matrix is the CSC layout of its transpose; we factor A^T and
        // use transposed solves
        let sym =
            SymbolicSparseColMatRef::new_checked(pattern.rows, pattern.cols, &pattern.row_ptr, None, &pattern.col_idx);
        let symbolic = SymbolicLu::try_new(sym)
            .map_err(|e| Error::Singular { row: 0, detail: format!("symbolic analysis failed: {e:?}") })?;
        Ok(Self { n: pattern.rows, row_ptr: pattern.row_ptr.clone(), col_idx: pattern.col_idx.clone(), symbolic })
    }

    /// Numeric factorization of a matrix with exactly the analysed pattern.
    pub fn factor(&self, m: &SparseMatrix) -> Result<SparseLu> {
        if m.row_ptr != self.row_ptr || m.col_idx != self.col_idx {
            return Err(Error::precondition("matrix pattern differs from the analysed pattern"));
        }
        let sym = SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.row_ptr, None, &self.col_idx);
        let mat = SparseColMatRef::new(sym, &m.values);
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat).map_err(|e| match e {
            LuError::SymbolicSingular { index } => {
                Error::Singular { row: index, detail: "no nonzero pivot available".into() }
            }
            LuError::Generic(g) => Error::Singular { row: 0, detail: format!("{g:?}") },
        })?;
        Ok(SparseLu { n: self.n, lu, norm: m.frobenius_norm() })
    }
}

/// Numeric sparse LU factors.
#[derive(Debug)]
pub struct SparseLu {
    n: usize,
    lu: Lu<usize, f64>,
    norm: f64,
}

/// `||A|| ||x|| / ||b||` bounds the condition number from below; beyond this
/// the factorization hit a (numerically) zero pivot.
const MAX_CONDITION: f64 = 1.0 / (64.0 * f64::EPSILON);

impl SparseLu {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::precondition("rhs length mismatch"));
        }
        let bnorm = super::norm2(x);
        let view = MatMut::from_column_major_slice_mut(x, self.n, 1);
        self.lu.solve_transpose_in_place(view);
        if let Some(row) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular { row, detail: "non-finite solution entry (numerically singular)".into() });
        }
        let xnorm = super::norm2(x);
        if self.norm * xnorm > MAX_CONDITION * bnorm {
            let row = (0..self.n).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap_or(0);
            return Err(Error::Singular {
                row,
                detail: format!(
                    "condition number exceeds {:.1e} (missing pressure constraint or disconnected mesh?)",
                    self.norm * xnorm / bnorm
                ),
            });
        }
        Ok(())
    }
}

/// One-shot direct solve of `m x = rhs`.
pub fn solve_sparse(m: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    m.check_square()?;
    if rhs.len() != m.rows {
        return Err(Error::precondition("rhs length mismatch"));
    }
    m.structural_check()?;
    let symbolic = SparseLuSymbolic::new(m)?;
    let x = symbolic.factor(m)?.solve(rhs)?;
    let r = m.matvec(&x);
    let res = r.iter().zip(rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let bound = 1e-10 * (m.frobenius_norm() * super::norm2(&x) + super::norm2(rhs));
    if res > bound {
        let (row, _) = r.iter().zip(rhs).map(|(a, b)| (a - b).abs()).enumerate().fold((0, 0.0), |acc, (i, v)| {
            if v > acc.1 {
                (i, v)
            } else {
                acc
            }
        });
        return Err(Error::Singular {
            row,
            detail: format!("residual {res:.3e} exceeds {bound:.3e} (numerically singular)"),
        });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i > 0 {
                b.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
            }
        }
        b.finalize()
    }

    #[test]
    fn builder_merges_duplicates_and_sorts() {
        let mut b = TripletBuilder::new(2, 3);
        b.add(1, 2, 1.0);
        b.add(0, 1, 2.0);
        b.add(1, 0, 3.0);
        b.add(1, 2, 4.0);
        let m = b.finalize();
        assert_eq!(m.row_ptr(), &[0, 1, 3]);
        assert_eq!(m.col_idx(), &[1, 0, 2]);
        assert_eq!(m.values(), &[2.0, 3.0, 5.0]);
    }

    #[test]
    fn identity_solve() {
        let b = vec![1.0, -2.0, 3.5];
        assert_eq!(solve_sparse(&SparseMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn laplacian_by_hand() {
        let x = solve_sparse(&tridiag(3), &[1.0, 1.0, 1.0]).unwrap();
        for (a, b) in x.iter().zip([1.5, 2.0, 1.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn nonsymmetric_needs_pivoting() {
        let mut b = TripletBuilder::new(3, 3);
        b.add(0, 1, 1.0);
        b.add(1, 0, 1.0);
        b.add(1, 2, 2.0);
        b.add(2, 2, 3.0);
        b.add(2, 0, 1.0);
        let m = b.finalize();
        let x_true = [0.3, -1.0, 2.0];
        let rhs = m.matvec(&x_true);
        let x = solve_sparse(&m, &rhs).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_row_is_reported() {
        let mut b = TripletBuilder::new(3, 3);
        b.add(0, 0, 1.0);
        b.add(2, 2, 1.0);
        b.add(1, 1, 0.0);
        match solve_sparse(&b.finalize(), &[1.0, 1.0, 1.0]) {
            Err(Error::Singular { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn numerically_singular_is_reported() {
        let mut b = TripletBuilder::new(2, 2);
        b.add(0, 0, 1.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 1.0);
        b.add(1, 1, 1.0);
        assert!(matches!(solve_sparse(&b.finalize(), &[1.0, 2.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn random_spd_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [5, 20, 60] {
            // random sparse B, A = B^T B + I
            let mut b = TripletBuilder::new(n, n);
            for i in 0..n {
                for _ in 0..3 {
                    b.add(i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0));
                }
            }
            let bm = b.finalize().to_dense();
            let mut a = TripletBuilder::new(n, n);
            let btb = bm.transpose().matmul(&bm);
            for i in 0..n {
                for j in 0..n {
                    let v = btb[(i, j)] + if i == j { 1.0 } else { 0.0 };
                    if v != 0.0 {
                        a.add(i, j, v);
                    }
                }
            }
            let a = a.finalize();
            let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = solve_sparse(&a, &rhs).unwrap();
            let r = a.matvec(&x);
            let res = r.iter().zip(&rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            assert!(res <= 1e-10 * (a.frobenius_norm() * crate::numerics::norm2(&x) + crate::numerics::norm2(&rhs)));
        }
    }

    #[test]
    fn symbolic_reuse_across_values() {
        let m = tridiag(6);
        let sym = SparseLuSymbolic::new(&m).unwrap();
        let mut m2 = m.clone();
        for v in m2.values_mut() {
            *v *= 3.0;
        }
        let x1 = sym.factor(&m).unwrap().solve(&[1.0; 6]).unwrap();
        let x2 = sym.factor(&m2).unwrap().solve(&[1.0; 6]).unwrap();
        for (a, b) in x1.iter().zip(&x2) {
            assert!((a - 3.0 * b).abs() < 1e-13);
        }
    }
}
