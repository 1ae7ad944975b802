use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{cholesky, Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityTest {
    pub edges: Vec<(usize, usize)>,
    pub pair_correlations: Vec<f64>,
    pub fisher_z: Vec<f64>,
    /// Wald statistic for equality of all Fisher z values.
    pub statistic: f64,
    pub df: usize,
    /// `statistic / df`.
    pub f_stat: f64,
    pub p_value: f64,
}

/// Sample Pearson correlation matrix of the columns of `y`.
pub fn sample_correlation(y: &Matrix) -> Result<Matrix> {
    let n = y.nrows();
    let p = y.ncols();
    let means = y.row_mean();
    let c = Matrix::from_fn(n, p, |i, j| y[(i, j)] - means[j]);
    let s = c.transpose() * &c;
    let sd: Vec<f64> = (0..p).map(|j| s[(j, j)].sqrt()).collect();
    if let Some(j) = sd.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateVariance(format!("column {j} is constant")));
    }
    Ok(Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { s[(i, j)] / (sd[i] * sd[j]) }))
}

/// `n · cov(r_jk, r_hm)` for sample correlations under a population
/// correlation matrix `rho`.
fn ncov(rho: &Matrix, (j, k): (usize, usize), (h, m): (usize, usize)) -> f64 {
    let r = |a: usize, b: usize| rho[(a, b)];
    0.5 * r(j, k) * r(h, m) * (r(j, h).powi(2) + r(j, m).powi(2) + r(k, h).powi(2) + r(k, m).powi(2))
        + r(j, h) * r(k, m)
        + r(j, m) * r(k, h)
        - r(j, k) * r(j, h) * r(j, m)
        - r(j, k) * r(k, h) * r(k, m)
        - r(j, h) * r(k, h) * r(h, m)
        - r(j, m) * r(k, m) * r(h, m)
}

/// Test that all adjacent-pair correlations are equal. Each edge's Pearson
/// correlation is Fisher-transformed, and consecutive differences of the z
/// values are tested with a Wald statistic whose covariance accounts for
/// edges sharing nodes.
pub fn correlation_heterogeneity_test(y: &Matrix, graph: &Graph) -> Result<HeterogeneityTest> {
    let n = y.nrows();
    if n < 4 {
        return Err(Error::Domain(format!("need at least 4 rows, got {n}")));
    }
    if y.ncols() != graph.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "data have {} columns, graph has {} nodes",
            y.ncols(),
            graph.node_count()
        )));
    }
    let k = graph.edge_count();
    if k < 2 {
        return Err(Error::Domain("need at least two edges to compare".into()));
    }
    let r = sample_correlation(y)?;
    let edges = graph.edges().to_vec();
    let pair: Vec<f64> = edges.iter().map(|&(a, b)| r[(a, b)]).collect();
    if pair.iter().any(|v| v.abs() >= 1.0) {
        return Err(Error::DegenerateVariance("a pair correlation is exactly ±1".into()));
    }
    let z: Vec<f64> = pair.iter().map(|v| v.atanh()).collect();
    // plug-in at the sample correlation matrix, which is always a valid
    // correlation matrix, with the delta-method factor of each Fisher z
    let scale = n as f64 - 3.0;
    let v = Matrix::from_fn(k, k, |a, b| {
        ncov(&r, edges[a], edges[b]) / ((1.0 - pair[a] * pair[a]) * (1.0 - pair[b] * pair[b]) * scale)
    });
    let c = Matrix::from_fn(k - 1, k, |i, j| {
        if j == i {
            1.0
        } else if j == i + 1 {
            -1.0
        } else {
            0.0
        }
    });
    let cz = &c * Vector::from_vec(z.clone());
    let cvc = &c * v * c.transpose();
    let statistic = cz.dot(&cholesky(&cvc)?.solve(&cz));
    let df = k - 1;
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(HeterogeneityTest {
        edges,
        pair_correlations: pair,
        fisher_z: z,
        statistic,
        df,
        f_stat: statistic / df as f64,
        p_value: chi.sf(statistic).clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn exchangeable(n: usize, p: usize, rho: f64, seed: u64) -> Matrix {
        let mut rng = stream_rng(seed, 0);
        let common: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        Matrix::from_fn(n, p, |i, _| rho.sqrt() * common[i] + (1.0 - rho).sqrt() * rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn variance_of_a_single_correlation() {
        // cov(r_jk, r_jk) = (1 − ρ²)² / n
        let rho = Matrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.4 });
        assert!((ncov(&rho, (0, 1), (0, 1)) - (1.0f64 - 0.16).powi(2)).abs() < 1e-14);
        // disjoint pairs of independent variables are uncorrelated
        let id = Matrix::identity(4, 4);
        assert_eq!(ncov(&id, (0, 1), (2, 3)), 0.0);
    }

    #[test]
    fn output_shape_and_fisher_z() {
        let g = Graph::lattice(3).unwrap();
        let y = exchangeable(30, 9, 0.5, 1);
        let t = correlation_heterogeneity_test(&y, &g).unwrap();
        assert_eq!(t.fisher_z.len(), g.edge_count());
        for (r, z) in t.pair_correlations.iter().zip(&t.fisher_z) {
            assert_eq!(r.atanh(), *z);
        }
        assert!((0.0..=1.0).contains(&t.p_value));
        assert_eq!(t.df, g.edge_count() - 1);
    }

    #[test]
    fn too_few_rows() {
        let g = Graph::path(3).unwrap();
        assert!(correlation_heterogeneity_test(&exchangeable(3, 3, 0.5, 2), &g).is_err());
    }

    #[test]
    fn constant_column() {
        let g = Graph::path(3).unwrap();
        let mut y = exchangeable(10, 3, 0.5, 3);
        y.column_mut(1).fill(2.0);
        assert!(matches!(correlation_heterogeneity_test(&y, &g), Err(Error::DegenerateVariance(_))));
    }
}
