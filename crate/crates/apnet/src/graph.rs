//! Undirected communication graphs and the spectral machinery built on them.
//!
//! Everything downstream (consensus dynamics, error coordinates, ultimate
//! bounds) reduces to a handful of facts about the graph Laplacian of a
//! connected undirected graph:
//!
//! * its spectrum is `0 = lambda_1 < lambda_2 <= ... <= lambda_n` with the
//!   all-ones vector spanning the nullspace,
//! * its Moore-Penrose pseudoinverse satisfies
//!   `L L^+ = I - (1/n) 1 1^T`,
//! * adding a nonzero, nonnegative diagonal regularization makes it positive
//!   definite.
//!
//! Graphs are small (tens of nodes), so eigenproblems are solved with a
//! classical Jacobi iteration on dense symmetric matrices rather than pulling
//! in a LAPACK backend. Node indices are 0-based throughout this crate; the
//! scenario file format is the only place 1-based labels appear.

use ndarray::{Array1, Array2};
use rand::Rng;
use thiserror::Error;

/// Relative cutoff below which an eigenvalue of a Laplacian is treated as the
/// structural zero when forming the pseudoinverse.
pub const ZERO_EIGENVALUE_REL_TOL: f64 = 1e-9;

/// Absolute asymmetry tolerated by [`spectrum`] before rejecting its input.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("a graph needs at least one node")]
    Empty,
    #[error("node {node} out of range for a graph on {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at node {node} is not allowed")]
    SelfLoop { node: usize },
    #[error("edge ({a}, {b}) listed more than once")]
    DuplicateEdge { a: usize, b: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("graph is disconnected; the Laplacian pseudoinverse identity needs a connected graph")]
    Disconnected,
    #[error("dimension mismatch: Laplacian is {n}x{n} but diagonal has length {k}")]
    DimensionMismatch { n: usize, k: usize },
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// An undirected, unweighted graph on `n` nodes.
///
/// Construction normalizes and validates the edge list; after that the graph
/// is immutable, so the adjacency structure can be shared freely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are stored with the smaller
    /// endpoint first and sorted; self-loops, duplicates (in either
    /// orientation), and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for node in [a, b] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop { node: a });
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge {
                a: w[0].0,
                b: w[0].1,
            });
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &normalized {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: normalized,
            neighbors,
        })
    }

    /// A path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &edges)
    }

    /// A uniformly random connected graph: a random spanning tree plus each
    /// remaining pair independently with probability `extra_edge_prob`.
    pub fn random_connected<R: Rng + ?Sized>(
        n: usize,
        extra_edge_prob: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut present = vec![vec![false; n]; n];
        let mut edges = Vec::new();
        for k in 1..n {
            let parent = order[rng.gen_range(0..k)];
            let (a, b) = (order[k].min(parent), order[k].max(parent));
            present[a][b] = true;
            edges.push((a, b));
        }
        for (a, row) in present.iter().enumerate() {
            for (b, &filled) in row.iter().enumerate().skip(a + 1) {
                if !filled && rng.gen_bool(extra_edge_prob) {
                    edges.push((a, b));
                }
            }
        }
        Graph::new(n, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    /// Dense adjacency matrix.
    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(i, j) in &self.edges {
            a[[i, j]] = 1.0;
            a[[j, i]] = 1.0;
        }
        a
    }

    /// Graph Laplacian `L = D - A`. Row and column sums are exactly zero by
    /// construction.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = Array2::zeros((self.n, self.n));
        for &(i, j) in &self.edges {
            l[[i, j]] = -1.0;
            l[[j, i]] = -1.0;
            l[[i, i]] += 1.0;
            l[[j, j]] += 1.0;
        }
        l
    }

    /// Connectivity by breadth-first traversal from node 0.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }

    /// Moore-Penrose pseudoinverse of the Laplacian, formed from the
    /// eigendecomposition with eigenvalues below
    /// [`ZERO_EIGENVALUE_REL_TOL`]` * lambda_max` truncated.
    ///
    /// Requires a connected graph; on a connected graph exactly the single
    /// structural zero eigenvalue is truncated and `L L^+ = I - (1/n) 1 1^T`
    /// holds to solver precision.
    pub fn laplacian_pseudoinverse(&self) -> Result<Array2<f64>> {
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let spec = spectrum(&self.laplacian())?;
        let lambda_max = spec.eigenvalues[self.n - 1].abs();
        let cutoff = ZERO_EIGENVALUE_REL_TOL * lambda_max;
        let mut pinv = Array2::zeros((self.n, self.n));
        for (k, &lambda) in spec.eigenvalues.iter().enumerate() {
            if lambda.abs() <= cutoff {
                continue;
            }
            let v = spec.eigenvectors.column(k);
            let w = 1.0 / lambda;
            for i in 0..self.n {
                for j in 0..self.n {
                    pinv[[i, j]] += w * v[i] * v[j];
                }
            }
        }
        Ok(pinv)
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns)
/// of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

/// Full eigendecomposition of a real symmetric matrix by classical Jacobi
/// rotations. Rejects non-square or non-symmetric input.
pub fn spectrum(m: &Array2<f64>) -> Result<SpectralData> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(GraphError::NotSquare { rows, cols });
    }
    let mut max_asymmetry = 0.0f64;
    for i in 0..rows {
        for j in (i + 1)..rows {
            max_asymmetry = max_asymmetry.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    if max_asymmetry > SYMMETRY_TOL {
        return Err(GraphError::NotSymmetric { max_asymmetry });
    }
    let (mut eigenvalues, eigenvectors) = jacobi_eigh(m)?;
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap());
    let mut sorted_vecs = Array2::zeros((rows, rows));
    for (dst, &src) in order.iter().enumerate() {
        sorted_vecs
            .column_mut(dst)
            .assign(&eigenvectors.column(src));
    }
    let sorted_vals = Array1::from_iter(order.iter().map(|&k| eigenvalues[k]));
    eigenvalues = sorted_vals;
    Ok(SpectralData {
        eigenvalues,
        eigenvectors: sorted_vecs,
    })
}

/// Smallest eigenvalue of `L + diag(k)`, the regularized Laplacian that
/// governs the convergence rate of the weighted consensus dynamics.
pub fn f_matrix_min_eig(laplacian: &Array2<f64>, k_diag: &Array1<f64>) -> Result<f64> {
    let n = laplacian.nrows();
    if k_diag.len() != n {
        return Err(GraphError::DimensionMismatch { n, k: k_diag.len() });
    }
    let mut f = laplacian.clone();
    for i in 0..n {
        f[[i, i]] += k_diag[i];
    }
    Ok(spectrum(&f)?.eigenvalues[0])
}

/// Classical Jacobi: repeatedly zero the largest off-diagonal entry with a
/// Givens rotation until the off-diagonal mass is at roundoff level.
fn jacobi_eigh(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = Array2::eye(n);
    if n == 1 {
        return Ok((Array1::from_elem(1, a[[0, 0]]), v));
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let tol = f64::EPSILON * scale;
    let max_rotations = 100 * n * n;
    for _ in 0..max_rotations {
        let (mut p, mut q, mut off) = (0, 1, 0.0f64);
        for i in 0..n {
            for j in (i + 1)..n {
                if a[[i, j]].abs() > off {
                    off = a[[i, j]].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off <= tol {
            let eigenvalues = Array1::from_iter((0..n).map(|i| a[[i, i]]));
            return Ok((eigenvalues, v));
        }
        let apq = a[[p, q]];
        let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
        let t = if theta >= 0.0 {
            1.0 / (theta + (1.0 + theta * theta).sqrt())
        } else {
            1.0 / (theta - (1.0 + theta * theta).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        for k in 0..n {
            let akp = a[[k, p]];
            let akq = a[[k, q]];
            a[[k, p]] = c * akp - s * akq;
            a[[k, q]] = s * akp + c * akq;
        }
        for k in 0..n {
            let apk = a[[p, k]];
            let aqk = a[[q, k]];
            a[[p, k]] = c * apk - s * aqk;
            a[[q, k]] = s * apk + c * aqk;
        }
        a[[p, q]] = 0.0;
        a[[q, p]] = 0.0;
        for k in 0..n {
            let vkp = v[[k, p]];
            let vkq = v[[k, q]];
            v[[k, p]] = c * vkp - s * vkq;
            v[[k, q]] = s * vkp + c * vkq;
        }
    }
    Err(GraphError::NoConvergence {
        sweeps: max_rotations,
    })
}
