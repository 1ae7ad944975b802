//! Built-in graphs, weight configurations and reference tables.

use std::sync::Arc;

use crate::error::Result;
use crate::graph::{EdgeWeights, Graph};
use crate::linalg::Matrix;

/// Edges of the five-node, eight-edge example graph (0-indexed).
pub const FIVE_NODE_EDGES: [(usize, usize); 8] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (2, 3), (2, 4), (3, 4)];

pub fn five_node_graph() -> Arc<Graph> {
    Arc::new(Graph::new(5, &FIVE_NODE_EDGES).expect("fixture graph is valid"))
}

/// The four edge-weight configurations of the five-node example, labelled
/// `a` to `d`, with weights listed in the order of [`FIVE_NODE_EDGES`].
pub fn five_node_configurations() -> [(char, [f64; 8]); 4] {
    [
        ('a', [0.33; 8]),
        ('b', [1.0; 8]),
        ('c', [2.0, 0.2, 2.0, 0.2, 0.2, 0.2, 0.2, 0.2]),
        ('d', [0.5, 0.5, 0.5, 0.005, 0.5, 0.005, 0.5, 0.5]),
    ]
}

pub fn five_node_weights(label: char) -> Option<Result<EdgeWeights>> {
    let g = five_node_graph();
    five_node_configurations()
        .into_iter()
        .find(|(l, _)| *l == label)
        .map(|(_, w)| EdgeWeights::from_edge_values(&g, w.to_vec()))
}

/// Printed two-decimal correlation matrices for the four configurations.
pub fn five_node_printed(label: char) -> Option<Matrix> {
    let rows: [[f64; 5]; 5] = match label {
        'a' => [
            [1.0, 0.43, 0.51, 0.43, 0.31],
            [0.43, 1.0, 0.51, 0.31, 0.43],
            [0.51, 0.51, 1.0, 0.51, 0.51],
            [0.43, 0.31, 0.51, 1.0, 0.43],
            [0.31, 0.43, 0.51, 0.43, 1.0],
        ],
        'b' => [
            [1.0, 0.89, 0.91, 0.89, 0.84],
            [0.89, 1.0, 0.91, 0.84, 0.89],
            [0.91, 0.91, 1.0, 0.91, 0.91],
            [0.89, 0.84, 0.91, 1.0, 0.89],
            [0.84, 0.89, 0.91, 0.89, 1.0],
        ],
        'c' => [
            [1.0, 0.90, 0.41, 0.90, 0.24],
            [0.90, 1.0, 0.41, 0.78, 0.25],
            [0.41, 0.41, 1.0, 0.41, 0.24],
            [0.90, 0.78, 0.41, 1.0, 0.25],
            [0.24, 0.25, 0.24, 0.25, 1.0],
        ],
        'd' => [
            [1.0, 0.52, 0.52, 0.52, 0.56],
            [0.52, 1.0, 0.32, 0.32, 0.52],
            [0.52, 0.32, 1.0, 0.32, 0.52],
            [0.52, 0.32, 0.32, 1.0, 0.52],
            [0.56, 0.52, 0.52, 0.52, 1.0],
        ],
        _ => return None,
    };
    Some(Matrix::from_fn(5, 5, |i, j| rows[i][j]))
}

/// First target correlation matrix of the model-class comparison.
pub fn kl_target_1() -> Matrix {
    let rows = [
        [1.0, 0.75, 0.125, 0.75, 0.125],
        [0.75, 1.0, 0.25, 0.5, 0.25],
        [0.125, 0.25, 1.0, 0.125, 0.25],
        [0.75, 0.5, 0.125, 1.0, 0.25],
        [0.125, 0.25, 0.25, 0.25, 1.0],
    ];
    Matrix::from_fn(5, 5, |i, j| rows[i][j])
}

/// Second target correlation matrix of the model-class comparison.
pub fn kl_target_2() -> Matrix {
    let rows = [
        [1.0, 0.35, 0.35, 0.35, 0.5],
        [0.35, 1.0, 0.125, 0.125, 0.35],
        [0.35, 0.125, 1.0, 0.125, 0.35],
        [0.35, 0.125, 0.125, 1.0, 0.35],
        [0.5, 0.35, 0.35, 0.35, 1.0],
    ];
    Matrix::from_fn(5, 5, |i, j| rows[i][j])
}

/// Published divergences `(class, target 1, target 2)`.
pub const KL_REFERENCE: [(&str, f64, f64); 3] =
    [("quasi-euclidean", 0.093, 0.028), ("car1", 1.135, 0.249), ("carw", 0.150, 0.111)];

/// Published simulation-study row: `(side, n, σ², coverage, bias, rmse)`.
pub type SimReference = (usize, usize, f64, f64, f64, f64);

pub const SIM_REFERENCE: [SimReference; 18] = [
    (5, 10, 0.2, 0.807, -0.314, 0.568),
    (5, 25, 0.2, 0.835, -0.209, 0.483),
    (5, 50, 0.2, 0.818, -0.177, 0.435),
    (10, 10, 0.2, 0.824, -0.267, 0.551),
    (10, 25, 0.2, 0.834, -0.222, 0.495),
    (10, 50, 0.2, 0.816, -0.190, 0.452),
    (15, 10, 0.2, 0.819, -0.284, 0.563),
    (15, 25, 0.2, 0.832, -0.224, 0.504),
    (15, 50, 0.2, 0.841, -0.176, 0.435),
    (5, 10, 0.8, 0.835, -0.334, 0.625),
    (5, 25, 0.8, 0.868, -0.297, 0.603),
    (5, 50, 0.8, 0.860, -0.257, 0.584),
    (10, 10, 0.8, 0.857, -0.314, 0.610),
    (10, 25, 0.8, 0.846, -0.300, 0.614),
    (10, 50, 0.8, 0.857, -0.277, 0.593),
    (15, 10, 0.8, 0.849, -0.303, 0.610),
    (15, 25, 0.8, 0.843, -0.310, 0.616),
    (15, 50, 0.8, 0.850, -0.276, 0.602),
];

pub fn sim_reference(side: usize, n: usize, sigma2: f64) -> Option<SimReference> {
    SIM_REFERENCE.iter().copied().find(|r| r.0 == side && r.1 == n && (r.2 - sigma2).abs() < 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cholesky, max_abs_diff};

    #[test]
    fn targets_are_symmetric_and_positive_definite() {
        for t in [kl_target_1(), kl_target_2()] {
            assert_eq!(max_abs_diff(&t, &t.transpose()), 0.0);
            assert!(cholesky(&t).is_ok());
        }
    }

    #[test]
    fn printed_tables_are_symmetric() {
        for l in ['a', 'b', 'c', 'd'] {
            let m = five_node_printed(l).unwrap();
            assert_eq!(max_abs_diff(&m, &m.transpose()), 0.0);
            assert!(five_node_weights(l).unwrap().is_ok());
        }
    }
}
