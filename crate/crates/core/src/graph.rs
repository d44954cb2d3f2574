//! Similarity graphs built from distance matrices.
//!
//! Every node `i` gets its own kernel scale `σᵢ`, the distance to its K-th
//! nearest neighbour, and the edge weights are
//! `w_ij = exp(−dist(i, j)² / (σᵢ σⱼ))`. The graph is fully connected and
//! has no self loops. Ties in neighbour rankings go to the smaller index.

use nalgebra::{DMatrix, DVector};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Default neighbour rank for the self-tuning scales.
pub const DEFAULT_SELF_TUNING_K: usize = 7;

#[derive(Clone, Debug, PartialEq)]
pub struct SelfTuningScales {
    sigma: Vec<f64>,
    k: usize,
}

impl SelfTuningScales {
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Neighbours of `i` sorted by ascending distance, self excluded.
fn ranked_neighbours(n: usize, i: usize, key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    order
}

/// `σᵢ` = distance from node `i` to its K-th nearest other node.
///
/// A zero scale (duplicates among the nearest neighbours) is replaced by the
/// smallest positive distance in the row.
pub fn self_tuning_scales(distances: &DistanceMatrix, k: usize) -> Result<SelfTuningScales> {
    let n = distances.n();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "self-tuning neighbour rank must be in 1..{n}, got {k}"
        )));
    }
    let sigma = (0..n)
        .map(|i| {
            let order = ranked_neighbours(n, i, |j| distances.get(i, j));
            let kth = distances.get(i, order[k - 1]);
            if kth > 0.0 {
                return Ok(kth);
            }
            order
                .iter()
                .map(|&j| distances.get(i, j))
                .find(|&d| d > 0.0)
                .ok_or_else(|| {
                    Error::DegenerateDataset(format!(
                        "series {i} has distance 0 to every other series"
                    ))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelfTuningScales { sigma, k })
}

/// Undirected weighted graph with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityGraph {
    weights: DMatrix<f64>,
    degrees: DVector<f64>,
}

impl SimilarityGraph {
    /// Validates symmetry, the zero diagonal and weights in `[0, 1]`.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: weights.ncols(),
            });
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::Data(format!("self loop at node {i}")));
            }
            for j in i + 1..n {
                let w = weights[(i, j)];
                if !(0.0..=1.0).contains(&w) || weights[(j, i)] != w {
                    return Err(Error::Data(format!("invalid weight {w} at ({i}, {j})")));
                }
            }
        }
        let degrees = DVector::from_iterator(n, weights.row_iter().map(|r| r.sum()));
        Ok(SimilarityGraph { weights, degrees })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    /// Number of undirected edges with positive weight.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.weights[(i, j)] > 0.0)
            .count()
    }
}

/// Self-tuned Gaussian kernel on a distance matrix.
pub fn gaussian_adjacency(
    distances: &DistanceMatrix,
    scales: &SelfTuningScales,
) -> Result<SimilarityGraph> {
    let n = distances.n();
    if scales.sigma.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: scales.sigma.len(),
        });
    }
    let sigma = &scales.sigma;
    let weights = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let d = distances.get(i, j);
            (-(d * d) / (sigma[i] * sigma[j])).exp()
        }
    });
    SimilarityGraph::from_weights(weights)
}

/// Convenience: scales and kernel in one call.
pub fn self_tuned_graph(distances: &DistanceMatrix, k: usize) -> Result<SimilarityGraph> {
    gaussian_adjacency(distances, &self_tuning_scales(distances, k)?)
}

/// `L_sym = I − D^{−1/2} W D^{−1/2}`, symmetric positive semi-definite with
/// spectrum in `[0, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedLaplacian {
    matrix: DMatrix<f64>,
}

impl NormalizedLaplacian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Wraps a matrix that is already a normalized Laplacian. Only squareness
    /// is checked.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(NormalizedLaplacian { matrix })
    }
}

pub fn sym_normalized_laplacian(graph: &SimilarityGraph) -> Result<NormalizedLaplacian> {
    let n = graph.n();
    if let Some(i) = graph.degrees.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::IsolatedNode(i));
    }
    let inv_sqrt: Vec<f64> = graph.degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let w = &graph.weights;
    let mut m = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]
    });
    // round-off can break exact symmetry
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    Ok(NormalizedLaplacian { matrix: m })
}

/// Keeps an edge when either endpoint ranks it among its `k` heaviest.
/// Kept weights are unchanged.
pub fn knn_sparsify(graph: &SimilarityGraph, k: usize) -> Result<SimilarityGraph> {
    let n = graph.n();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "kNN sparsification needs 1 <= k <= {}, got {k}",
            n.saturating_sub(1)
        )));
    }
    let w = &graph.weights;
    let mut keep = DMatrix::from_element(n, n, false);
    for i in 0..n {
        for &j in ranked_neighbours(n, i, |j| -w[(i, j)]).iter().take(k) {
            keep[(i, j)] = true;
            keep[(j, i)] = true;
        }
    }
    let weights = DMatrix::from_fn(n, n, |i, j| if keep[(i, j)] { w[(i, j)] } else { 0.0 });
    let sparse = SimilarityGraph::from_weights(weights)?;
    if let Some(i) = sparse.degrees.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::IsolatedNode(i));
    }
    Ok(sparse)
}
