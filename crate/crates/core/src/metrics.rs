//! Graph metrics: shortest path, resistance distance and the `Δ^(m)` family
//! `d_ij = sqrt((e_i − e_j)ᵀ {L⁺}^m (e_i − e_j))`, whose `m = 2` member is the
//! quasi-Euclidean metric. Also Euclidean certification of distance matrices
//! by classical multidimensional scaling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{laplacian, pinv_power, EdgeWeights};
use crate::linalg::{check_square, sym_eigen, Matrix};

/// Relative tolerance on the most negative Gram eigenvalue.
pub const EUCLIDEAN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MetricTag {
    ShortestPath,
    Resistance,
    DeltaM(f64),
    /// Distances read from a file or supplied by the caller.
    External,
}

impl MetricTag {
    pub fn quasi_euclidean() -> Self {
        MetricTag::DeltaM(2.0)
    }
}

/// Symmetric, hollow, nonnegative distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: Matrix,
    tag: MetricTag,
}

impl DistanceMatrix {
    /// Validates hollowness, symmetry and nonnegativity.
    pub fn new(d: Matrix, tag: MetricTag) -> Result<Self> {
        let p = check_square(&d, "distance matrix")?;
        for j in 0..p {
            if d[(j, j)] != 0.0 {
                return Err(Error::Domain(format!("distance matrix has nonzero diagonal at {j}")));
            }
            for k in (j + 1)..p {
                let v = d[(j, k)];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Domain(format!("invalid distance {v} at ({j}, {k})")));
                }
                if v != d[(k, j)] {
                    return Err(Error::Domain(format!("distance matrix asymmetric at ({j}, {k})")));
                }
            }
        }
        Ok(Self { d, tag })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.d
    }

    pub fn into_matrix(self) -> Matrix {
        self.d
    }

    pub fn tag(&self) -> MetricTag {
        self.tag
    }

    pub fn size(&self) -> usize {
        self.d.nrows()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.d[(j, k)]
    }

    pub fn max_entry(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Largest violation `d_ij − d_ik − d_kj` over all triples (0 if none). O(p³).
    pub fn triangle_violation(&self) -> f64 {
        let p = self.size();
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    worst = worst.max(self.d[(i, j)] - self.d[(i, k)] - self.d[(k, j)]);
                }
            }
        }
        worst
    }

    fn debug_check(self) -> Self {
        debug_assert!(self.triangle_violation() <= 1e-9, "triangle inequality violated");
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All-pairs minimal path sums, treating each weight as an additive edge
/// length. Callers who think of weights as proximities should pass their
/// reciprocals.
pub fn shortest_path(w: &EdgeWeights) -> DistanceMatrix {
    let g = w.graph();
    let p = g.node_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
    for (&(j, k), &len) in g.edges().iter().zip(w.values()) {
        adj[j].push((k, len));
        adj[k].push((j, len));
    }
    let mut d = Matrix::from_element(p, p, f64::INFINITY);
    for src in 0..p {
        let mut heap = BinaryHeap::new();
        d[(src, src)] = 0.0;
        heap.push(HeapItem { dist: 0.0, node: src });
        while let Some(HeapItem { dist, node }) = heap.pop() {
            if dist > d[(src, node)] {
                continue;
            }
            for &(next, len) in &adj[node] {
                let cand = dist + len;
                if cand < d[(src, next)] {
                    d[(src, next)] = cand;
                    heap.push(HeapItem { dist: cand, node: next });
                }
            }
        }
    }
    // float sums along reversed paths can differ in the last bit
    for j in 0..p {
        for k in (j + 1)..p {
            let v = d[(j, k)].min(d[(k, j)]);
            d[(j, k)] = v;
            d[(k, j)] = v;
        }
    }
    DistanceMatrix { d, tag: MetricTag::ShortestPath }.debug_check()
}

/// `B = 1 diag(A)ᵀ + diag(A) 1ᵀ − 2A`.
pub fn hollow_transform(a: &Matrix) -> Matrix {
    let p = a.nrows();
    Matrix::from_fn(p, p, |i, j| if i == j { 0.0 } else { a[(i, i)] + a[(j, j)] - 2.0 * a[(i, j)] })
}

fn from_gram_like(b: Matrix, sqrt: bool, tag: MetricTag) -> DistanceMatrix {
    let p = b.nrows();
    let mut d = Matrix::zeros(p, p);
    for j in 0..p {
        for k in (j + 1)..p {
            let v = 0.5 * (b[(j, k)] + b[(k, j)]);
            let v = v.max(0.0);
            let v = if sqrt { v.sqrt() } else { v };
            d[(j, k)] = v;
            d[(k, j)] = v;
        }
    }
    DistanceMatrix { d, tag }
}

/// Effective resistance, weights acting as conductances.
pub fn resistance(w: &EdgeWeights) -> Result<DistanceMatrix> {
    let lp = pinv_power(&laplacian(w), 1.0)?;
    Ok(from_gram_like(hollow_transform(&lp.matrix), false, MetricTag::Resistance))
}

/// The `Δ^(m)` metric.
pub fn delta_m(w: &EdgeWeights, m: f64) -> Result<DistanceMatrix> {
    let lp = pinv_power(&laplacian(w), m)?;
    Ok(from_gram_like(hollow_transform(&lp.matrix), true, MetricTag::DeltaM(m)))
}

/// Quasi-Euclidean distances, `Δ^(2)`.
pub fn quasi_euclidean(w: &EdgeWeights) -> Result<DistanceMatrix> {
    delta_m(w, 2.0)
}

#[derive(Debug, Clone)]
pub struct EuclideanCertificate {
    pub is_euclidean: bool,
    pub min_gram_eigenvalue: f64,
    pub max_gram_eigenvalue: f64,
    /// `p × k` coordinates, present when certified.
    pub embedding: Option<Matrix>,
}

/// Classical-MDS test: `D` is Euclidean iff `−½ J D∘² J` is positive semidefinite.
pub fn certify_euclidean(d: &DistanceMatrix) -> EuclideanCertificate {
    let p = d.size();
    let mut gram = Matrix::zeros(p, p);
    let sq = d.matrix().map(|v| v * v);
    let row_means: Vec<f64> = (0..p).map(|i| sq.row(i).sum() / p as f64).collect();
    let grand = row_means.iter().sum::<f64>() / p as f64;
    for i in 0..p {
        for j in 0..p {
            gram[(i, j)] = -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }
    let eig = sym_eigen(&gram);
    let min = eig.values[0];
    let max = eig.values[p - 1];
    let is_euclidean = min >= -EUCLIDEAN_TOLERANCE * max.abs().max(f64::MIN_POSITIVE);
    let embedding = is_euclidean.then(|| {
        let keep: Vec<usize> = (0..p).filter(|&i| eig.values[i] > 0.0).collect();
        let mut x = Matrix::zeros(p, keep.len().max(1));
        for (c, &i) in keep.iter().enumerate() {
            let s = eig.values[i].sqrt();
            for r in 0..p {
                x[(r, c)] = eig.vectors[(r, i)] * s;
            }
        }
        x
    });
    EuclideanCertificate {
        is_euclidean,
        min_gram_eigenvalue: min,
        max_gram_eigenvalue: max,
        embedding,
    }
}

/// Pairwise Euclidean distances between the rows of `x`.
pub fn pairwise_distances(x: &Matrix) -> Matrix {
    let p = x.nrows();
    Matrix::from_fn(p, p, |i, j| (x.row(i) - x.row(j)).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, Graph};
    use crate::linalg::max_abs_diff;
    use std::sync::Arc;

    fn weights(p: usize, edges: &[(usize, usize)], vals: &[f64]) -> EdgeWeights {
        let g = Arc::new(build_graph(p, edges).unwrap());
        let mut ordered = vec![0.0; edges.len()];
        for (&(a, b), &v) in edges.iter().zip(vals) {
            ordered[g.edge_index(a, b).unwrap()] = v;
        }
        EdgeWeights::from_edge_values(&g, ordered).unwrap()
    }

    #[test]
    fn shortest_path_on_path_graph() {
        let w = weights(3, &[(0, 1), (1, 2)], &[1.0, 2.0]);
        assert_eq!(shortest_path(&w).get(0, 2), 3.0);
    }

    #[test]
    fn shortest_path_takes_detour() {
        let w = weights(3, &[(0, 1), (1, 2), (0, 2)], &[1.0, 1.0, 10.0]);
        let d = shortest_path(&w);
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.triangle_violation(), 0.0);
    }

    #[test]
    fn single_edge_resistance_is_reciprocal() {
        for w in [0.1, 1.0, 7.5] {
            let ew = weights(2, &[(0, 1)], &[w]);
            let d = resistance(&ew).unwrap();
            assert!((d.get(0, 1) - 1.0 / w).abs() < 1e-12 / w);
        }
    }

    #[test]
    fn parallel_paths_resistance() {
        // 0-1-3 and 0-2-3: two series pairs of unit resistors in parallel
        let w = weights(4, &[(0, 1), (1, 3), (0, 2), (2, 3)], &[1.0; 4]);
        assert!((resistance(&w).unwrap().get(0, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_weights_halves_resistance() {
        let w = weights(4, &[(0, 1), (1, 2), (2, 3), (0, 2)], &[0.4, 1.3, 2.0, 0.7]);
        let w2 = w.divided_by(0.5).unwrap();
        let (a, b) = (resistance(&w).unwrap(), resistance(&w2).unwrap());
        assert!(max_abs_diff(&(a.matrix() * 0.5), b.matrix()) < 1e-12);
    }

    #[test]
    fn single_edge_quasi_euclidean() {
        for w in [0.3, 1.0, 4.0] {
            let d = delta_m(&weights(2, &[(0, 1)], &[w]), 2.0).unwrap();
            let want = 1.0 / (w * 2f64.sqrt());
            assert!((d.get(0, 1) - want).abs() < 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn delta_one_squared_is_resistance() {
        let w = weights(4, &[(0, 1), (1, 2), (2, 3), (0, 2)], &[0.4, 1.3, 2.0, 0.7]);
        let d1 = delta_m(&w, 1.0).unwrap();
        let r = resistance(&w).unwrap();
        assert!(max_abs_diff(&d1.matrix().map(|v| v * v), r.matrix()) < 1e-10);
    }

    #[test]
    fn quasi_euclidean_scaling() {
        let w = weights(4, &[(0, 1), (1, 2), (2, 3), (0, 2)], &[0.4, 1.3, 2.0, 0.7]);
        let c = 3.7;
        let d = delta_m(&w, 2.0).unwrap();
        let dc = delta_m(&w.divided_by(c).unwrap(), 2.0).unwrap();
        let rel = max_abs_diff(&(d.matrix() * c), dc.matrix()) / dc.max_entry();
        assert!(rel < 1e-9);
    }

    #[test]
    fn hollow_transform_of_zero() {
        assert_eq!(hollow_transform(&Matrix::zeros(4, 4)), Matrix::zeros(4, 4));
    }

    #[test]
    fn hollow_transform_null_space() {
        let c = [0.3, -1.2, 2.5, 0.05, 7.0];
        let a = Matrix::from_fn(5, 5, |i, j| c[i] + c[j]);
        assert!(hollow_transform(&a).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hollow_transform_route_matches_delta_m() {
        let w = weights(4, &[(0, 1), (1, 2), (2, 3), (0, 2)], &[0.4, 1.3, 2.0, 0.7]);
        let lp2 = pinv_power(&laplacian(&w), 2.0).unwrap();
        let alt = hollow_transform(&lp2.matrix).map(|v| v.max(0.0).sqrt());
        assert!(max_abs_diff(&alt, delta_m(&w, 2.0).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn points_on_a_line_are_euclidean() {
        let x: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
        let d = DistanceMatrix::new(Matrix::from_fn(4, 4, |i, j| (x[i] - x[j]).abs()), MetricTag::External)
            .unwrap();
        let cert = certify_euclidean(&d);
        assert!(cert.is_euclidean);
        let emb = cert.embedding.unwrap();
        assert!(max_abs_diff(&pairwise_distances(&emb), d.matrix()) < 1e-7);
    }

    #[test]
    fn four_cycle_shortest_path_not_euclidean() {
        // Gram matrix is circulant (0.75, 0.25, −1.25, 0.25): eigenvalues {0, −1, 2, 2}
        let g = Arc::new(Graph::cycle(4).unwrap());
        let d = shortest_path(&EdgeWeights::uniform(&g, 1.0).unwrap());
        let cert = certify_euclidean(&d);
        assert!(!cert.is_euclidean);
        assert!((cert.min_gram_eigenvalue + 1.0).abs() < 1e-12);
        assert!((cert.max_gram_eigenvalue - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distance_matrix_validation() {
        let mut m = Matrix::zeros(3, 3);
        m[(0, 1)] = 1.0;
        assert!(DistanceMatrix::new(m.clone(), MetricTag::External).is_err());
        m[(1, 0)] = 1.0;
        assert!(DistanceMatrix::new(m, MetricTag::External).is_ok());
    }
}
