//! Coordinate-list sparse matrices.

use serde::{Deserialize, Serialize};

/// A sparse matrix stored as `(row, col, value)` triplets.
///
/// Duplicate coordinates are allowed and are summed by every consumer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n, n);
        for i in 0..n {
            m.push(i, i, 1.0);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    m.push(i, j, v);
                }
            }
        }
        m
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Number of stored entries with a nonzero value.
    pub fn nnz(&self) -> usize {
        self.compressed_rows()
            .iter()
            .map(|r| r.iter().filter(|(_, v)| *v != 0.0).count())
            .sum()
    }

    /// Row-wise lists with duplicates summed and explicit zeros dropped,
    /// columns sorted ascending within each row.
    pub fn compressed_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.nrows];
        for &(i, j, v) in &self.entries {
            rows[i].push((j, v));
        }
        for r in &mut rows {
            merge_sorted(r);
        }
        rows
    }

    pub fn compressed_cols(&self) -> Vec<Vec<(usize, f64)>> {
        self.transpose().compressed_rows()
    }

    pub fn transpose(&self) -> Self {
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            entries: self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut out = vec![0.0; self.nrows];
        for &(i, j, v) in &self.entries {
            out[i] += v * x[j];
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for &(i, j, v) in &self.entries {
            d[i][j] += v;
        }
        d
    }

    /// Appends `extra` zero columns on the right.
    pub fn pad_cols(&mut self, extra: usize) {
        self.ncols += extra;
    }
}

/// Sorts by index, sums duplicates and drops zeros.
pub(crate) fn merge_sorted(r: &mut Vec<(usize, f64)>) {
    r.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(r.len());
    for &(j, v) in r.iter() {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    *r = out;
}
