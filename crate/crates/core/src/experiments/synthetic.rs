use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::covariance::{quasi_euclidean_correlation, Matern};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::inference::ModelState;
use crate::linalg::{spectral_map, sym_eigen, Matrix};

#[derive(Debug, Clone)]
pub enum SyntheticKind {
    Gaussian,
    /// Counts with the given effort (unit effort when `None`) and node
    /// covariates (none when `None`).
    PoissonGlm { effort: Option<Matrix>, covariates: Option<Matrix> },
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    /// Gaussian observations or Poisson counts, n×p.
    pub y: Matrix,
    /// Latent log-rates of a GLM draw.
    pub theta: Option<Matrix>,
    pub effort: Option<Matrix>,
    pub covariates: Option<Matrix>,
}

/// `n` rows with covariance `σ² ρ_ν(Δ(W)) + ψI`, either observed directly or
/// as the latent log-rates of Poisson counts.
pub fn generate_synthetic<R: Rng + ?Sized>(
    graph: &Arc<Graph>,
    params: &ModelState,
    nu: f64,
    n: usize,
    kind: &SyntheticKind,
    rng: &mut R,
) -> Result<SyntheticData> {
    if !(params.sigma2 >= 0.0 && params.psi >= 0.0) {
        return Err(Error::Domain("variances must be nonnegative".into()));
    }
    let p = graph.node_count();
    let corr = quasi_euclidean_correlation(&params.edge_weights(graph)?, &Matern::new(nu)?)?;
    let mut sigma = corr * params.sigma2;
    for i in 0..p {
        sigma[(i, i)] += params.psi;
    }
    // symmetric square root, which also covers singular covariances
    let root = spectral_map(&sym_eigen(&sigma), |l| l.max(0.0).sqrt());
    let z = Matrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
    let noise = z * root;
    match kind {
        SyntheticKind::Gaussian => Ok(SyntheticData { y: noise, theta: None, effort: None, covariates: None }),
        SyntheticKind::PoissonGlm { effort, covariates } => {
            let effort = effort.clone().unwrap_or_else(|| Matrix::from_element(n, p, 1.0));
            if effort.shape() != (n, p) {
                return Err(Error::DimensionMismatch("effort must be n×p".into()));
            }
            let x = covariates.clone().unwrap_or_else(|| Matrix::zeros(p, 0));
            if x.nrows() != p || x.ncols() != params.beta.len() {
                return Err(Error::DimensionMismatch(format!(
                    "covariates are {}x{}, expected {p}x{}",
                    x.nrows(),
                    x.ncols(),
                    params.beta.len()
                )));
            }
            if !params.beta0.is_empty() && params.beta0.len() != n {
                return Err(Error::DimensionMismatch("beta0 must have one entry per row".into()));
            }
            let xb = &x * crate::linalg::Vector::from_vec(params.beta.clone());
            let theta = Matrix::from_fn(n, p, |i, j| {
                params.beta0.get(i).copied().unwrap_or(0.0) + xb[j] + noise[(i, j)]
            });
            let mut y = Matrix::zeros(n, p);
            for i in 0..n {
                for j in 0..p {
                    let rate = theta[(i, j)].exp() * effort[(i, j)];
                    y[(i, j)] = if rate > 0.0 {
                        Poisson::new(rate).map_err(|e| Error::Domain(e.to_string()))?.sample(rng)
                    } else {
                        0.0
                    };
                }
            }
            Ok(SyntheticData { y, theta: Some(theta), effort: Some(effort), covariates: Some(x) })
        }
    }
}
