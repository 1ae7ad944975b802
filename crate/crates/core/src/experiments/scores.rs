use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::inference::{quantile, Chain};
use crate::metrics::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeScore {
    pub edge: (usize, usize),
    /// Positive when the nodes are intrinsically closer than their
    /// geographic separation suggests.
    pub z_d: f64,
}

fn standardize(xs: &[f64], what: &str) -> Result<Vec<f64>> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !(sd > 1e-12 * mean.abs().max(f64::MIN_POSITIVE)) || !sd.is_finite() {
        return Err(Error::DegenerateVariance(format!("{what} edge distances are constant")));
    }
    Ok(xs.iter().map(|x| (x - mean) / sd).collect())
}

/// `Z(geographic) − Z(posterior)` over the edge set, where `Z` scales a set to
/// mean zero and standard deviation one.
pub fn edge_z_scores_from_values(posterior: &[f64], geographic: &[f64], graph: &Graph) -> Result<Vec<EdgeScore>> {
    let m = graph.edge_count();
    if posterior.len() != m || geographic.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "expected {m} edge distances, got {} and {}",
            posterior.len(),
            geographic.len()
        )));
    }
    if m < 2 {
        return Err(Error::DegenerateVariance("need at least two edges".into()));
    }
    let zp = standardize(posterior, "posterior")?;
    let zg = standardize(geographic, "geographic")?;
    Ok(graph
        .edges()
        .iter()
        .zip(zg.iter().zip(&zp))
        .map(|(&edge, (g, p))| EdgeScore { edge, z_d: g - p })
        .collect())
}

pub fn edge_z_scores(posterior_d_mean: &DistanceMatrix, geo_d: &DistanceMatrix, graph: &Graph) -> Result<Vec<EdgeScore>> {
    let p = graph.node_count();
    if posterior_d_mean.size() != p || geo_d.size() != p {
        return Err(Error::DimensionMismatch(format!("distance matrices must be {p}x{p}")));
    }
    let post: Vec<f64> = graph.edges().iter().map(|&(j, k)| posterior_d_mean.get(j, k)).collect();
    let geo: Vec<f64> = graph.edges().iter().map(|&(j, k)| geo_d.get(j, k)).collect();
    edge_z_scores_from_values(&post, &geo, graph)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRatio {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub draws: usize,
}

/// Posterior summary of `σ² / (σ² + ψ)` with a central 95% interval.
pub fn variance_ratio(chain: &Chain) -> Result<VarianceRatio> {
    if chain.len() < 2 {
        return Err(Error::ChainTooShort { len: chain.len(), min: 2 });
    }
    let r: Vec<f64> = chain.states.iter().map(|s| s.variance_ratio()).collect();
    Ok(VarianceRatio {
        mean: r.iter().sum::<f64>() / r.len() as f64,
        lower: quantile(&r, 0.025),
        upper: quantile(&r, 0.975),
        draws: r.len(),
    })
}
