//! Sparse matrix substrate with both row-major and column-major adjacency.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense;
use crate::error::{Error, Result};

/// One nonzero set held in both row-major and column-major adjacency, with
/// the scalar constants the solvers need cached at build time.
///
/// The matrix is immutable after construction and safe to share across
/// threads. Within each row and column, entries are sorted by index.
#[derive(Clone, Debug)]
pub struct DualSparseMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
    symmetric: bool,
    max_abs_entry: f64,
    max_col_sqnorm: f64,
    s_row: usize,
    s_col: usize,
}

/// Result of a power-iteration eigenvalue estimate.
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub value: f64,
    pub converged: bool,
    pub iters: usize,
}

impl DualSparseMatrix {
    /// Builds both adjacency views from a triple list, dropping stored zeros
    /// and computing the cached constants in one pass.
    ///
    /// With `symmetric` set, the triples must either be closed under
    /// transposition (mirror values compared exactly) or contain only one
    /// triangle, in which case the missing mirrors are added.
    pub fn from_triples(
        triples: &[(usize, usize, f64)],
        n_rows: usize,
        n_cols: usize,
        symmetric: bool,
    ) -> Result<Self> {
        if symmetric && n_rows != n_cols {
            return Err(Error::NotSymmetric);
        }
        let mut map = BTreeMap::new();
        for &(row, col, value) in triples {
            if row >= n_rows || col >= n_cols {
                return Err(Error::IndexOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
            if value == 0.0 {
                continue;
            }
            if map.insert((row, col), value).is_some() {
                return Err(Error::DuplicateEntry { row, col });
            }
        }
        if symmetric {
            let mut mirrors = Vec::new();
            for (&(row, col), &value) in &map {
                if row == col {
                    continue;
                }
                match map.get(&(col, row)) {
                    Some(&mirror) => {
                        if mirror != value {
                            return Err(Error::AsymmetricPair {
                                row,
                                col,
                                value,
                                mirror,
                            });
                        }
                    }
                    None => mirrors.push((col, row, value)),
                }
            }
            for (row, col, value) in mirrors {
                map.insert((row, col), value);
            }
        }

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_cols];
        let mut max_abs_entry = 0.0f64;
        let mut col_sqnorm = vec![0.0f64; n_cols];
        for (&(row, col), &value) in &map {
            rows[row].push((col, value));
            cols[col].push((row, value));
            max_abs_entry = max_abs_entry.max(value.abs());
            col_sqnorm[col] += value * value;
        }
        let s_row = rows.iter().map(Vec::len).max().unwrap_or(0);
        let s_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_col_sqnorm = col_sqnorm.iter().fold(0.0f64, |m, &x| m.max(x));
        Ok(Self {
            n_rows,
            n_cols,
            rows,
            cols,
            symmetric,
            max_abs_entry,
            max_col_sqnorm,
            s_row,
            s_col,
        })
    }

    /// Identity-minus-self for a square matrix: returns `I - A`.
    ///
    /// Used by the simple-iteration experiment where the iteration matrix
    /// and the system matrix are related by `A = I - A~`.
    pub fn identity_minus(&self) -> Result<Self> {
        if self.n_rows != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: self.n_cols,
            });
        }
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for i in 0..self.n_rows {
            map.insert((i, i), 1.0);
        }
        for (r, c, v) in self.triples() {
            let slot = map.entry((r, c)).or_insert(0.0);
            *slot -= v;
        }
        let triples: Vec<_> = map.into_iter().map(|((r, c), v)| (r, c, v)).collect();
        Self::from_triples(&triples, self.n_rows, self.n_cols, self.symmetric)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    /// `max_{i,j} |A_ij|`, the l1-norm step constant of the quadratic form.
    pub fn max_abs_entry(&self) -> f64 {
        self.max_abs_entry
    }

    /// `max_i ||A^(i)||_2^2` over columns.
    pub fn max_col_sqnorm(&self) -> f64 {
        self.max_col_sqnorm
    }

    /// Maximum number of nonzeros in any row.
    pub fn s_row(&self) -> usize {
        self.s_row
    }

    /// Maximum number of nonzeros in any column.
    pub fn s_col(&self) -> usize {
        self.s_col
    }

    /// Entries of row `i`, sorted by column index.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Entries of column `j`, sorted by row index.
    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    /// Diagonal entry `A_ii` (zero when not stored).
    pub fn diag(&self, i: usize) -> f64 {
        match self.rows[i].binary_search_by_key(&i, |&(c, _)| c) {
            Ok(slot) => self.rows[i][slot].1,
            Err(_) => 0.0,
        }
    }

    /// All stored entries in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, entries)| entries.iter().map(move |&(c, v)| (r, c, v)))
    }

    /// Sparse matrix-vector product `A x`; cost proportional to the nonzero
    /// count.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        for (i, entries) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, v) in entries {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// Sparse product `A^T y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: y.len(),
            });
        }
        let mut x = vec![0.0; self.n_cols];
        for (j, entries) in self.cols.iter().enumerate() {
            let mut acc = 0.0;
            for &(i, v) in entries {
                acc += v * y[i];
            }
            x[j] = acc;
        }
        Ok(x)
    }

    /// Power-iteration estimate of `lambda_max` for a symmetric PSD matrix.
    ///
    /// Stops when the Rayleigh quotient changes by at most `tol` relative,
    /// or after `max_iters` sweeps; `converged` reports which.
    pub fn power_lambda_max(&self, max_iters: usize, tol: f64, seed: u64) -> Result<PowerIteration> {
        if !self.symmetric {
            return Err(Error::NotSymmetric);
        }
        let n = self.n_rows;
        if n == 0 || self.nnz() == 0 {
            return Ok(PowerIteration {
                value: 0.0,
                converged: true,
                iters: 0,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let norm = dense::norm2(&v);
        for x in v.iter_mut() {
            *x /= norm;
        }
        let mut lambda = 0.0;
        for iter in 1..=max_iters {
            let mut w = self.apply(&v)?;
            let next = dense::dot(&v, &w);
            let wn = dense::norm2(&w);
            if wn == 0.0 {
                // v landed in the kernel; for PSD input the estimate is 0.
                return Ok(PowerIteration {
                    value: 0.0,
                    converged: true,
                    iters: iter,
                });
            }
            for x in w.iter_mut() {
                *x /= wn;
            }
            let done = (next - lambda).abs() <= tol * next.abs();
            lambda = next;
            v = w;
            if done {
                return Ok(PowerIteration {
                    value: lambda,
                    converged: true,
                    iters: iter,
                });
            }
        }
        Ok(PowerIteration {
            value: lambda,
            converged: false,
            iters: max_iters,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_build_caches() {
        let a = DualSparseMatrix::from_triples(&[(0, 0, 2.0), (1, 1, 1.0)], 2, 2, true).unwrap();
        assert_eq!(a.max_abs_entry(), 2.0);
        assert_eq!(a.s_row(), 1);
        assert_eq!(a.max_col_sqnorm(), 4.0);
    }

    #[test]
    fn empty_matrix_has_zero_caches() {
        let a = DualSparseMatrix::from_triples(&[], 3, 3, false).unwrap();
        assert_eq!(a.max_abs_entry(), 0.0);
        assert_eq!(a.s_row(), 0);
        assert_eq!(a.s_col(), 0);
        assert_eq!(a.max_col_sqnorm(), 0.0);
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn symmetry_closure_mirrors_upper_triangle() {
        let a = DualSparseMatrix::from_triples(&[(0, 1, 3.0)], 2, 2, true).unwrap();
        assert_eq!(a.row(1), &[(0, 3.0)]);
        assert_eq!(a.s_row(), 1);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(
            DualSparseMatrix::from_triples(&[(2, 0, 1.0)], 2, 2, false),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            DualSparseMatrix::from_triples(&[(0, 0, 1.0), (0, 0, 2.0)], 2, 2, false),
            Err(Error::DuplicateEntry { .. })
        ));
        assert!(matches!(
            DualSparseMatrix::from_triples(&[(0, 1, 1.0), (1, 0, 2.0)], 2, 2, true),
            Err(Error::AsymmetricPair { .. })
        ));
    }

    #[test]
    fn stored_zeros_are_dropped() {
        let a = DualSparseMatrix::from_triples(&[(0, 0, 0.0), (1, 1, 2.0)], 2, 2, false).unwrap();
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn apply_matches_hand_products() {
        let a = DualSparseMatrix::from_triples(&[(0, 0, 2.0), (1, 1, 1.0)], 2, 2, true).unwrap();
        assert_eq!(a.apply(&[1.0, 1.0]).unwrap(), vec![2.0, 1.0]);
        assert_eq!(a.apply(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);

        let b =
            DualSparseMatrix::from_triples(&[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)], 2, 2, false)
                .unwrap();
        assert_eq!(b.apply(&[1.0, 1.0]).unwrap(), vec![2.0, 1.0]);
        assert!(matches!(
            b.apply(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_iteration_on_diagonal_spectra() {
        let a = DualSparseMatrix::from_triples(&[(0, 0, 2.0), (1, 1, 1.0)], 2, 2, true).unwrap();
        let est = a.power_lambda_max(1000, 1e-10, 7).unwrap();
        assert!(est.converged);
        assert!((est.value - 2.0).abs() <= 1e-8);

        let eye: Vec<_> = (0..5).map(|i| (i, i, 1.0)).collect();
        let id = DualSparseMatrix::from_triples(&eye, 5, 5, true).unwrap();
        let est = id.power_lambda_max(100, 1e-12, 1).unwrap();
        assert!((est.value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn power_iteration_rejects_general_matrices() {
        let a = DualSparseMatrix::from_triples(&[(0, 1, 1.0)], 2, 2, false).unwrap();
        assert!(matches!(
            a.power_lambda_max(10, 1e-6, 0),
            Err(Error::NotSymmetric)
        ));
    }
}
