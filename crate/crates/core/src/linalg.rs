//! Small dense and sparse linear algebra used by the smoothers, the coarse
//! solver and the assembled test oracles.

use crate::error::{Error, Result};

/// A square linear map acting on plain coefficient slices.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        crate::error::check_len("DenseMatrix::from_row_major", n * n, data.len())?;
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Replaces row and column `i` by the corresponding identity row/column.
    pub fn pin(&mut self, i: usize) {
        for j in 0..self.n {
            self.data[i * self.n + j] = 0.0;
            self.data[j * self.n + i] = 0.0;
        }
        self.data[i * self.n + i] = 1.0;
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(&self.data[i * self.n..(i + 1) * self.n], x);
        }
    }
}

/// LU factorization with partial pivoting, stored in place.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(matrix: DenseMatrix, context: &'static str) -> Result<Self> {
        let n = matrix.n;
        let scale = matrix.max_abs().max(f64::MIN_POSITIVE);
        let mut lu = matrix.data;
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (piv_row, piv_abs) = (col..n)
                .map(|r| (r, lu[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs <= 1e-14 * scale {
                return Err(Error::SingularMatrix {
                    context,
                    column: col,
                    pivot: piv_abs,
                });
            }
            if piv_row != col {
                perm.swap(piv_row, col);
                for j in 0..n {
                    lu.swap(piv_row * n + j, col * n + j);
                }
            }
            let pivot = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / pivot;
                if factor == 0.0 {
                    continue;
                }
                lu[r * n + col] = factor;
                let (upper, lower) = lu.split_at_mut(r * n);
                let src = &upper[col * n + col + 1..col * n + n];
                let dst = &mut lower[col + 1..n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= factor * s;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`; `rhs` holds `b` on entry and `x` on exit.
    /// Returns the number of multiply-add operations performed.
    pub fn solve_in_place(&self, rhs: &mut [f64], scratch: &mut Vec<f64>) -> u64 {
        let n = self.n;
        scratch.clear();
        scratch.extend(self.perm.iter().map(|&p| rhs[p]));
        let x = scratch;
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            x[i] -= dot(row, &x[..i]);
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = dot(row, &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        rhs.copy_from_slice(x);
        (n * n) as u64
    }
}

/// Compressed sparse row matrix assembled from triplets (duplicates summed).
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let triplets = (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v)))
            .collect();
        CsrMatrix::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
}
