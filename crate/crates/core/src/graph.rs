//! Graph structure, the edge-weight parameter space, the weighted Laplacian
//! and powers of its Moore-Penrose pseudoinverse.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{spectral_map, sym_eigen, Matrix};

/// Relative eigenvalue threshold separating the structural zero eigenvalue of a
/// connected Laplacian from the rest of the spectrum.
pub const DEFAULT_EIG_CUTOFF: f64 = 1e-12;

/// Undirected, connected, simple graph. Edges are stored as `(j, k)` with
/// `j < k`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    p: usize,
    edges: Vec<(usize, usize)>,
    node_labels: Option<Vec<String>>,
    #[serde(skip)]
    index: HashMap<(usize, usize), usize>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Build a graph on `p` nodes from an undirected edge list.
pub fn build_graph(p: usize, edge_list: &[(usize, usize)]) -> Result<Graph> {
    Graph::new(p, edge_list)
}

impl Graph {
    pub fn new(p: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!("graph needs at least 2 nodes, got {p}")));
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in edge_list {
            for idx in [a, b] {
                if idx >= p {
                    return Err(Error::NodeOutOfRange { index: idx, nodes: p });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
            edges.push(e);
        }
        edges.sort_unstable();

        let mut uf = UnionFind::new(p);
        for &(a, b) in &edges {
            uf.union(a, b);
        }
        let mut roots: Vec<usize> = (0..p).map(|i| uf.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.len() != 1 {
            return Err(Error::DisconnectedGraph { components: roots.len() });
        }

        let mut g = Self { p, edges, node_labels: None, index: HashMap::new() };
        g.rebuild_index();
        Ok(g)
    }

    /// `side × side` grid with rook adjacency, nodes numbered row-major.
    pub fn lattice(side: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..side {
            for c in 0..side {
                let i = r * side + c;
                if c + 1 < side {
                    edges.push((i, i + 1));
                }
                if r + 1 < side {
                    edges.push((i, i + side));
                }
            }
        }
        Self::new(side * side, &edges)
    }

    pub fn path(p: usize) -> Result<Self> {
        let edges: Vec<_> = (1..p).map(|i| (i - 1, i)).collect();
        Self::new(p, &edges)
    }

    pub fn cycle(p: usize) -> Result<Self> {
        let mut edges: Vec<_> = (1..p).map(|i| (i - 1, i)).collect();
        edges.push((p - 1, 0));
        Self::new(p, &edges)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.p
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    fn rebuild_index(&mut self) {
        self.index = self.edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    }

    pub fn node_count(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    /// Position of edge `{j, k}` in [`Graph::edges`].
    pub fn edge_index(&self, j: usize, k: usize) -> Option<usize> {
        if self.index.is_empty() && !self.edges.is_empty() {
            // deserialized graph: index is not serialized
            return self.edges.iter().position(|&e| e == (j.min(k), j.max(k)));
        }
        self.index.get(&(j.min(k), j.max(k))).copied()
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.edge_index(j, k).is_some()
    }

    /// Indices of the edges incident to `node`.
    pub fn incident_edges(&self, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == node || b == node)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.p];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    /// Binary adjacency matrix.
    pub fn adjacency(&self) -> Matrix {
        let mut a = Matrix::zeros(self.p, self.p);
        for &(j, k) in &self.edges {
            a[(j, k)] = 1.0;
            a[(k, j)] = 1.0;
        }
        a
    }

    /// Hex SHA-256 over the node count and the canonical edge list.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.p as u64).to_le_bytes());
        for &(a, b) in &self.edges {
            h.update((a as u64).to_le_bytes());
            h.update((b as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Restore the lookup table after deserialization.
    pub fn reindexed(mut self) -> Self {
        self.rebuild_index();
        self
    }
}

/// Symmetric nonnegative weights supported exactly on the edges of a graph.
#[derive(Debug, Clone)]
pub struct EdgeWeights {
    graph: Arc<Graph>,
    values: Vec<f64>,
    w: Matrix,
}

impl EdgeWeights {
    /// Weights given in the order of [`Graph::edges`].
    pub fn from_edge_values(graph: &Arc<Graph>, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} edges",
                values.len(),
                graph.edge_count()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            let (a, b) = graph.edges()[i];
            return Err(Error::InvalidWeights(format!(
                "edge ({a}, {b}) has weight {v}, must be positive and finite"
            )));
        }
        let p = graph.node_count();
        let mut w = Matrix::zeros(p, p);
        for (&(j, k), &v) in graph.edges().iter().zip(&values) {
            w[(j, k)] = v;
            w[(k, j)] = v;
        }
        Ok(Self { graph: Arc::clone(graph), values, w })
    }

    /// Validate a dense matrix against the graph's support.
    pub fn from_matrix(graph: &Arc<Graph>, w: &Matrix) -> Result<Self> {
        let p = graph.node_count();
        if w.nrows() != p || w.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "weight matrix is {}x{}, graph has {p} nodes",
                w.nrows(),
                w.ncols()
            )));
        }
        for j in 0..p {
            for k in 0..p {
                let v = w[(j, k)];
                if v != w[(k, j)] {
                    return Err(Error::InvalidWeights(format!("asymmetric at ({j}, {k})")));
                }
                let on_edge = j != k && graph.has_edge(j, k);
                if on_edge && !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidWeights(format!("edge ({j}, {k}) has weight {v}")));
                }
                if !on_edge && v != 0.0 {
                    return Err(Error::InvalidWeights(format!(
                        "nonzero weight {v} at ({j}, {k}) which is not an edge"
                    )));
                }
            }
        }
        let values = graph.edges().iter().map(|&(j, k)| w[(j, k)]).collect();
        Self::from_edge_values(graph, values)
    }

    pub fn uniform(graph: &Arc<Graph>, value: f64) -> Result<Self> {
        Self::from_edge_values(graph, vec![value; graph.edge_count()])
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.w[(j, k)]
    }

    /// `W / c`.
    pub fn divided_by(&self, c: f64) -> Result<Self> {
        Self::from_edge_values(&self.graph, self.values.iter().map(|v| v / c).collect())
    }
}

/// Weighted graph Laplacian `diag(W 1) − W`.
#[derive(Debug, Clone)]
pub struct Laplacian {
    l: Matrix,
    graph: Arc<Graph>,
}

pub fn laplacian(w: &EdgeWeights) -> Laplacian {
    let p = w.graph.node_count();
    let mut l = -w.matrix().clone();
    for j in 0..p {
        l[(j, j)] = w.matrix().row(j).sum();
    }
    Laplacian { l, graph: Arc::clone(&w.graph) }
}

impl Laplacian {
    pub fn matrix(&self) -> &Matrix {
        &self.l
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// Recover the weights via `W = diag(diag L) − L`.
    pub fn to_weights(&self) -> Result<EdgeWeights> {
        let values = self.graph.edges().iter().map(|&(j, k)| -self.l[(j, k)]).collect();
        EdgeWeights::from_edge_values(&self.graph, values)
    }
}

/// `{L⁺}^m` computed spectrally.
#[derive(Debug, Clone)]
pub struct PseudoInversePower {
    pub matrix: Matrix,
    pub m: f64,
    pub eig_cutoff: f64,
}

pub fn pinv_power(l: &Laplacian, m: f64) -> Result<PseudoInversePower> {
    pinv_power_with_cutoff(l, m, DEFAULT_EIG_CUTOFF)
}

pub fn pinv_power_with_cutoff(l: &Laplacian, m: f64, eig_cutoff: f64) -> Result<PseudoInversePower> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("pseudoinverse exponent must be positive, got {m}")));
    }
    let eig = sym_eigen(&l.l);
    let lam_max = eig.values[eig.values.len() - 1];
    let threshold = eig_cutoff * lam_max;
    let zeros = eig.values.iter().filter(|&&v| v <= threshold).count();
    if zeros != 1 || lam_max <= 0.0 {
        return Err(Error::NumericalRankDeficiency { zero_eigenvalues: zeros });
    }
    let matrix = spectral_map(&eig, |lam| if lam <= threshold { 0.0 } else { lam.powf(-m) });
    Ok(PseudoInversePower { matrix, m, eig_cutoff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, max_abs_diff};

    pub(crate) fn five_node() -> Arc<Graph> {
        Arc::new(
            build_graph(5, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (1, 4), (2, 4), (3, 4)]).unwrap(),
        )
    }

    #[test]
    fn smallest_connected_graph() {
        let g = build_graph(2, &[(0, 1)]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn five_node_graph_shape() {
        let g = five_node();
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.degrees(), vec![3, 3, 4, 3, 3]);
    }

    #[test]
    fn isolated_node_is_disconnected() {
        let err = build_graph(3, &[(0, 1)]).unwrap_err();
        assert!(matches!(err, Error::DisconnectedGraph { components: 2 }));
    }

    #[test]
    fn malformed_edges_rejected() {
        assert!(matches!(build_graph(3, &[(0, 0), (1, 2)]), Err(Error::SelfLoop(0))));
        assert!(matches!(
            build_graph(3, &[(0, 1), (1, 0), (1, 2)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            build_graph(3, &[(0, 3)]),
            Err(Error::NodeOutOfRange { index: 3, nodes: 3 })
        ));
    }

    #[test]
    fn lattice_edge_counts() {
        assert_eq!(Graph::lattice(5).unwrap().edge_count(), 40);
        assert_eq!(Graph::lattice(10).unwrap().edge_count(), 180);
        assert_eq!(Graph::lattice(15).unwrap().edge_count(), 420);
    }

    #[test]
    fn weights_must_match_support() {
        let g = five_node();
        let mut m = EdgeWeights::uniform(&g, 1.0).unwrap().matrix().clone();
        m[(0, 4)] = 0.5;
        m[(4, 0)] = 0.5;
        assert!(matches!(EdgeWeights::from_matrix(&g, &m), Err(Error::InvalidWeights(_))));
        assert!(EdgeWeights::from_edge_values(&g, vec![1.0; 7]).is_err());
        let mut vals = vec![1.0; 8];
        vals[3] = 0.0;
        assert!(EdgeWeights::from_edge_values(&g, vals).is_err());
    }

    #[test]
    fn two_node_laplacian() {
        let g = Arc::new(build_graph(2, &[(0, 1)]).unwrap());
        let l = laplacian(&EdgeWeights::uniform(&g, 2.5).unwrap());
        let expected = Matrix::from_row_slice(2, 2, &[2.5, -2.5, -2.5, 2.5]);
        assert_eq!(l.matrix(), &expected);
    }

    #[test]
    fn uniform_weights_laplacian_diagonal() {
        let g = five_node();
        let l = laplacian(&EdgeWeights::uniform(&g, 0.33).unwrap());
        let diag: Vec<f64> = l.matrix().diagonal().iter().copied().collect();
        for (got, want) in diag.iter().zip([0.99, 0.99, 1.32, 0.99, 0.99]) {
            assert!((got - want).abs() < 1e-12);
        }
        for j in 0..5 {
            assert!(l.matrix().row(j).sum().abs() < 1e-10);
        }
    }

    #[test]
    fn two_node_pseudoinverse() {
        // L = [[1,-1],[-1,1]] has eigenvalues {0, 2}; L⁺ = v vᵀ / 2 with v = (1,-1)/√2
        let g = Arc::new(build_graph(2, &[(0, 1)]).unwrap());
        let l = laplacian(&EdgeWeights::uniform(&g, 1.0).unwrap());
        let pinv = pinv_power(&l, 1.0).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        assert!(max_abs_diff(&pinv.matrix, &expected) < 1e-14);
    }

    #[test]
    fn moore_penrose_conditions() {
        let g = five_node();
        let w = EdgeWeights::from_edge_values(&g, vec![0.5, 1.0, 2.0, 0.3, 0.7, 1.1, 0.9, 1.6]).unwrap();
        let l = laplacian(&w);
        let lp = pinv_power(&l, 1.0).unwrap().matrix;
        let lm = l.matrix();
        let scale = frobenius(lm);
        assert!(frobenius(&(lm * &lp * lm - lm)) / scale < 1e-8);
        assert!(frobenius(&(&lp * lm * &lp - &lp)) / frobenius(&lp) < 1e-8);
        let a = lm * &lp;
        assert!(frobenius(&(&a - a.transpose())) < 1e-8);
        let b = &lp * lm;
        assert!(frobenius(&(&b - b.transpose())) < 1e-8);
    }

    #[test]
    fn integer_power_consistency() {
        let g = five_node();
        let w = EdgeWeights::from_edge_values(&g, vec![0.5, 1.0, 2.0, 0.3, 0.7, 1.1, 0.9, 1.6]).unwrap();
        let l = laplacian(&w);
        let p1 = pinv_power(&l, 1.0).unwrap().matrix;
        let p2 = pinv_power(&l, 2.0).unwrap().matrix;
        assert!(frobenius(&(&p1 * &p1 - &p2)) < 1e-10);
    }

    #[test]
    fn near_disconnection_is_reported() {
        let g = Arc::new(Graph::path(3).unwrap());
        let w = EdgeWeights::from_edge_values(&g, vec![1.0, 1e-300]).unwrap();
        let err = pinv_power(&laplacian(&w), 1.0).unwrap_err();
        assert!(matches!(err, Error::NumericalRankDeficiency { zero_eigenvalues: 2 }));
    }

    #[test]
    fn nonpositive_exponent_rejected() {
        let g = five_node();
        let l = laplacian(&EdgeWeights::uniform(&g, 1.0).unwrap());
        assert!(pinv_power(&l, 0.0).is_err());
    }

    #[test]
    fn laplacian_roundtrip_recovers_weights() {
        let g = five_node();
        let w = EdgeWeights::from_edge_values(&g, vec![0.5, 1.0, 2.0, 0.3, 0.7, 1.1, 0.9, 1.6]).unwrap();
        let back = laplacian(&w).to_weights().unwrap();
        assert_eq!(back.values(), w.values());
    }
}
