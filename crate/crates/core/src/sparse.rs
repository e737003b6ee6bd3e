//! Minimal compressed-sparse-row matrix used for transition matrices and
//! Laplacians.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<S> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> CsrMatrix<S> {
    /// Assemble from `(row, col, value)` triplets. Duplicates are summed,
    /// entries are sorted by column within each row, explicit zeros are
    /// kept.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, S)]) -> Self {
        let mut sorted: Vec<(usize, usize, S)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<S> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
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

    /// `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => S::zero(),
        }
    }

    pub fn row_sum(&self, r: usize) -> S {
        self.row(r).fold(S::zero(), |acc, (_, v)| acc + v)
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).fold(S::zero(), |acc, (c, v)| acc + v * x[c]))
            .collect()
    }

    /// y = xᵀ A (row vector times matrix).
    pub fn vec_mul(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![S::zero(); self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == S::zero() {
                continue;
            }
            for (c, v) in self.row(r) {
                y[c] += xr * v;
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<S> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn mul_dvector(&self, x: &DVector<S>) -> DVector<S> {
        DVector::from_vec(self.mul_vec(x.as_slice()))
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }
}

/// Number of strongly connected components of a graph given as successor
/// lists (Kosaraju, iterative).
pub(crate) fn scc_count(succ: &[Vec<usize>]) -> usize {
    let n = succ.len();
    let mut rev = vec![Vec::new(); n];
    for (u, out) in succ.iter().enumerate() {
        for &v in out {
            rev[v].push(u);
        }
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((u, next)) = stack.last_mut() {
            let u = *u;
            if let Some(&v) = succ[u].get(*next) {
                *next += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut assigned = vec![false; n];
    let mut count = 0;
    for &root in order.iter().rev() {
        if assigned[root] {
            continue;
        }
        count += 1;
        assigned[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &rev[u] {
                if !assigned[v] {
                    assigned[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

impl<S: Scalar> CsrMatrix<S> {
    /// Whether the sparsity pattern (nonzero entries) is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        let succ: Vec<Vec<usize>> = (0..self.nrows)
            .map(|r| self.row(r).filter(|&(_, v)| v != S::zero()).map(|(c, _)| c).collect())
            .collect();
        self.nrows > 0 && scc_count(&succ) == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembly_sums_duplicates() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, 1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.row_sum(0), 3.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]), vec![3.0, 3.0]);
        assert_eq!(m.vec_mul(&[1.0, 2.0]), vec![2.0, 1.0, 3.0]);
        let d = m.to_dense();
        assert_eq!(d[(0, 0)], 2.0);
        assert!(!m.is_symmetric());
    }
}
