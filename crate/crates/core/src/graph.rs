//! Areal adjacency structure with a cached spectral decomposition.
//!
//! The normalized adjacency `D^{-1/2} W D^{-1/2}` is decomposed once at
//! construction. Its eigenpairs `(λ, P)` give the CAR precision for any
//! correlation `ρ` as `D^{1/2} P (I - ρΛ) Pᵀ D^{1/2}`, so log-determinants
//! need no per-iteration linear algebra.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct AreaGraph {
    neighbors: Vec<Vec<usize>>,
    degrees: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    spectral_columns: DMatrix<f64>,
}

impl AreaGraph {
    /// Builds the graph from 1-based undirected edges over areas `1..=n_areas`.
    ///
    /// Edges are symmetrized and deduplicated. Every area must end up with
    /// at least one neighbour.
    pub fn new(n_areas: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_areas];
        for &(a, b) in edges {
            if a == 0 || b == 0 || a > n_areas || b > n_areas {
                return Err(Error::EdgeOutOfRange(a, b, n_areas));
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            sets[a - 1].insert(b - 1);
            sets[b - 1].insert(a - 1);
        }
        if let Some(node) = sets.iter().position(BTreeSet::is_empty) {
            return Err(Error::IsolatedNode { node: node + 1 });
        }
        let neighbors: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let degrees: Vec<f64> = neighbors.iter().map(|n| n.len() as f64).collect();

        let inv_sqrt: Vec<f64> = degrees.iter().map(|d| d.sqrt().recip()).collect();
        let mut normalized = DMatrix::<f64>::zeros(n_areas, n_areas);
        for (i, nbrs) in neighbors.iter().enumerate() {
            for &k in nbrs {
                normalized[(i, k)] = inv_sqrt[i] * inv_sqrt[k];
            }
        }
        let eig = SymmetricEigen::new(normalized);

        // Ascending eigenvalue order keeps the cache independent of the
        // solver's internal ordering.
        let mut order: Vec<usize> = (0..n_areas).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(n_areas, n_areas, |r, c| eig.eigenvectors[(r, order[c])]);
        let spectral_columns =
            DMatrix::from_fn(n_areas, n_areas, |r, c| degrees[r].sqrt() * eigenvectors[(r, c)]);

        Ok(Self {
            neighbors,
            degrees,
            eigenvalues,
            eigenvectors,
            spectral_columns,
        })
    }

    pub fn n_areas(&self) -> usize {
        self.neighbors.len()
    }

    /// Sorted 0-based neighbours of area `i` (0-based).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Eigenvalues of the normalized adjacency, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors `P`, column `i` pairs with `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Columns `v_i` of `D^{1/2} P`.
    pub fn spectral_columns(&self) -> &DMatrix<f64> {
        &self.spectral_columns
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// Undirected edges `(i, k)` with `i < k`, 0-based.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.iter().filter(move |&&k| k > i).map(move |&k| (i, k)))
    }

    pub fn n_edges(&self) -> usize {
        self.edges().count()
    }

    pub fn dense_adjacency(&self) -> DMatrix<f64> {
        let j = self.n_areas();
        let mut w = DMatrix::zeros(j, j);
        for (i, k) in self.edges() {
            w[(i, k)] = 1.0;
            w[(k, i)] = 1.0;
        }
        w
    }

    /// `Σ v_i v_iᵀ − ρ Σ λ_i v_i v_iᵀ`, which equals `D − ρW`.
    pub fn precision_from_spectrum(&self, rho: f64) -> DMatrix<f64> {
        let v = &self.spectral_columns;
        let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.n_areas(),
            self.eigenvalues.iter().map(|l| 1.0 - rho * l),
        ));
        v * scale * v.transpose()
    }
}

/// Adds an edge from every isolated area to its nearest other area by id.
///
/// Returns the augmented edge list and the links that were added (1-based).
pub fn link_islands(n_areas: usize, edges: &[(usize, usize)]) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let mut degree = vec![0usize; n_areas + 1];
    for &(a, b) in edges {
        if a <= n_areas && b <= n_areas && a != b {
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    let mut all = edges.to_vec();
    let mut added = Vec::new();
    for node in 1..=n_areas {
        if degree[node] == 0 && n_areas > 1 {
            let partner = if node < n_areas { node + 1 } else { node - 1 };
            all.push((node, partner));
            added.push((node, partner));
            degree[node] += 1;
            degree[partner] += 1;
        }
    }
    (all, added)
}
