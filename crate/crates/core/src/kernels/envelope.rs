//! Envelope (profile) Cholesky for sparse symmetric positive definite
//! matrices with a fixed sparsity pattern.
//!
//! The pattern is ordered once with reverse Cuthill-McKee; every later
//! factorization reuses the ordering and envelope layout and only refills
//! values. Rows of `L` are stored contiguously from their first nonzero
//! column to the diagonal, so fill stays inside the envelope.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Off-diagonal structure of a symmetric matrix as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePattern {
    adj: Vec<Vec<usize>>,
}

impl SparsePattern {
    pub fn new(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut p = Self::new(n);
        for (a, b) in edges {
            if a != b {
                p.adj[a].push(b);
                p.adj[b].push(a);
            }
        }
        for list in &mut p.adj {
            list.sort_unstable();
            list.dedup();
        }
        p
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }
}

/// Reverse Cuthill-McKee ordering, returned as new-to-old positions.
pub fn reverse_cuthill_mckee(pattern: &SparsePattern) -> Vec<usize> {
    let n = pattern.len();
    let degree = |i: usize| pattern.neighbors(i).len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree(i), i))
            .expect("unvisited node exists");
        let start = pseudo_peripheral(pattern, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<usize> = pattern.neighbors(u).iter().copied().filter(|&v| !visited[v]).collect();
            next.sort_by_key(|&v| (degree(v), v));
            for v in next {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(pattern: &SparsePattern, root: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; pattern.len()];
    seen[root] = true;
    let mut levels = vec![vec![root]];
    loop {
        let mut next = Vec::new();
        for &u in levels.last().unwrap() {
            for &v in pattern.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

/// George-Liu search for a node of (near) maximal eccentricity.
fn pseudo_peripheral(pattern: &SparsePattern, seed: usize) -> usize {
    let mut root = seed;
    let mut depth = bfs_levels(pattern, root).len();
    loop {
        let levels = bfs_levels(pattern, root);
        let candidate = *levels
            .last()
            .unwrap()
            .iter()
            .min_by_key(|&&v| (pattern.neighbors(v).len(), v))
            .unwrap();
        let cand_depth = bfs_levels(pattern, candidate).len();
        if cand_depth > depth {
            root = candidate;
            depth = cand_depth;
        } else {
            return root;
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    iperm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Layout for `pattern` under a reverse Cuthill-McKee ordering.
    pub fn new(pattern: &SparsePattern) -> Self {
        let perm = reverse_cuthill_mckee(pattern);
        Self::with_ordering(pattern, perm)
    }

    /// Layout for a fully dense `n × n` matrix in natural order.
    pub fn dense(n: usize) -> Self {
        let perm: Vec<usize> = (0..n).collect();
        let first = vec![0; n];
        Self::from_parts(perm, first)
    }

    pub fn with_ordering(pattern: &SparsePattern, perm: Vec<usize>) -> Self {
        let n = pattern.len();
        assert_eq!(perm.len(), n, "ordering must cover every node");
        let mut iperm = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let first = (0..n)
            .map(|r| {
                pattern
                    .neighbors(perm[r])
                    .iter()
                    .map(|&o| iperm[o])
                    .filter(|&c| c < r)
                    .min()
                    .unwrap_or(r)
            })
            .collect();
        Self::from_parts(perm, first)
    }

    fn from_parts(perm: Vec<usize>, first: Vec<usize>) -> Self {
        let n = perm.len();
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for (r, &f) in first.iter().enumerate() {
            let last = *offset.last().unwrap();
            offset.push(last + r - f + 1);
        }
        let values = vec![0.0; *offset.last().unwrap()];
        Self {
            perm,
            iperm,
            first,
            offset,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the lower envelope, diagonal included.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn ordering(&self) -> &[usize] {
        &self.perm
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Adds `value` to the symmetric entry `(i, j)` in original indices.
    ///
    /// Each unordered off-diagonal pair should be added once.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (mut r, mut c) = (self.iperm[i], self.iperm[j]);
        if r < c {
            std::mem::swap(&mut r, &mut c);
        }
        debug_assert!(c >= self.first[r], "entry ({i}, {j}) outside the envelope");
        self.values[self.offset[r] + c - self.first[r]] += value;
    }

    /// In-place `A = L Lᵀ` over the filled values.
    pub fn factorize(&mut self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let (done, rest) = self.values.split_at_mut(self.offset[i]);
            let row = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let row_j = &done[self.offset[j]..self.offset[j + 1]];
                let s = row[j - fi] - dot4(&row[k0 - fi..j - fi], &row_j[k0 - fj..j - fj]);
                row[j - fi] = s / row_j[j - fj];
            }
            let d = row[i - fi] - dot4(&row[..i - fi], &row[..i - fi]);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::CholeskyFailure {
                    pivot: self.perm[i],
                    value: d,
                });
            }
            row[i - fi] = d.sqrt();
        }
        Ok(())
    }

    #[inline]
    fn diag(&self, i: usize) -> f64 {
        self.values[self.offset[i + 1] - 1]
    }

    /// Solves `L y = x` in place (permuted coordinates).
    pub fn solve_lower(&self, x: &mut [f64]) {
        for i in 0..self.dim() {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1] - 1];
            let s = dot4(row, &x[fi..i]);
            x[i] = (x[i] - s) / self.diag(i);
        }
    }

    /// Solves `Lᵀ y = x` in place (permuted coordinates).
    pub fn solve_upper(&self, x: &mut [f64]) {
        for i in (0..self.dim()).rev() {
            let xi = x[i] / self.diag(i);
            x[i] = xi;
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1] - 1];
            for (xk, l) in x[fi..i].iter_mut().zip(row) {
                *xk -= l * xi;
            }
        }
    }

    pub fn permute_in(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&o| x[o]).collect()
    }

    pub fn permute_out(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = y[new];
        }
        out
    }

    /// `A^{-1} b` in original coordinates.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = self.permute_in(b);
        self.solve_lower(&mut y);
        self.solve_upper(&mut y);
        self.permute_out(&y)
    }

    /// `log|A| = 2 Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.diag(i).ln()).sum::<f64>()
    }
}

#[inline]
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..n {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
