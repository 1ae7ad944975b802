//! Conditional autoregressive baselines.
//!
//! The first-order CAR uses the adjacency matrix scaled by its spectral
//! radius, `Σ = σ²(I − κ A/λ_max(A))⁻¹`, so that every `κ ∈ (−1, 1)` gives a
//! valid covariance. The weighted CAR is `Σ = σ²(diag(W1) − κW)⁻¹`, positive
//! definite for `|κ| < 1` by diagonal dominance.

use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceMatrix, Provenance};
use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};
use crate::linalg::{cholesky, sym_eigen, Matrix};

#[derive(Debug, Clone)]
pub struct Car1Params {
    pub sigma2: f64,
    pub kappa: f64,
    pub adjacency: Matrix,
}

impl Car1Params {
    pub fn new(graph: &Graph, sigma2: f64, kappa: f64) -> Result<Self> {
        check_common(sigma2, kappa)?;
        Ok(Self { sigma2, kappa, adjacency: graph.adjacency() })
    }
}

#[derive(Debug, Clone)]
pub struct CarwParams {
    pub sigma2: f64,
    pub kappa: f64,
    pub weights: EdgeWeights,
}

impl CarwParams {
    pub fn new(weights: EdgeWeights, sigma2: f64, kappa: f64) -> Result<Self> {
        check_common(sigma2, kappa)?;
        Ok(Self { sigma2, kappa, weights })
    }
}

fn check_common(sigma2: f64, kappa: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    if !(kappa.abs() < 1.0) {
        return Err(Error::Domain(format!("kappa must lie in (-1, 1), got {kappa}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CarKind {
    Car1,
    Carw,
}

fn invert_precision(q: Matrix, sigma2: f64, kappa: f64, model: &str) -> Result<CovarianceMatrix> {
    let chol = cholesky(&q)?;
    let sigma = chol.inverse() * sigma2;
    CovarianceMatrix::new(
        sigma,
        Provenance {
            model: format!("{model}(kappa={kappa})"),
            metric: None,
            nu: None,
            sigma2,
            nugget: 0.0,
            correlation_scaled: false,
        },
    )
}

/// Largest eigenvalue of the adjacency matrix.
pub fn spectral_radius(a: &Matrix) -> f64 {
    let eig = sym_eigen(a);
    eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn car1_precision(adjacency: &Matrix, kappa: f64) -> Matrix {
    let p = adjacency.nrows();
    let lam = spectral_radius(adjacency);
    Matrix::identity(p, p) - adjacency * (kappa / lam)
}

pub fn car1_sigma(params: &Car1Params) -> Result<CovarianceMatrix> {
    check_common(params.sigma2, params.kappa)?;
    let q = car1_precision(&params.adjacency, params.kappa);
    invert_precision(q, params.sigma2, params.kappa, "car1")
}

pub fn carw_precision(w: &EdgeWeights, kappa: f64) -> Matrix {
    let m = w.matrix();
    let p = m.nrows();
    let mut q = m * (-kappa);
    for j in 0..p {
        q[(j, j)] = m.row(j).sum();
    }
    q
}

pub fn carw_sigma(params: &CarwParams) -> Result<CovarianceMatrix> {
    check_common(params.sigma2, params.kappa)?;
    let q = carw_precision(&params.weights, params.kappa);
    invert_precision(q, params.sigma2, params.kappa, "carw")
}
