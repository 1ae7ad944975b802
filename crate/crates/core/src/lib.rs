//! Covariance models for data observed on the nodes of a graph.
//!
//! Latent positive edge weights `W` are mapped through the quasi-Euclidean
//! graph metric to a Euclidean distance matrix, and a Matérn correlation
//! function turns those distances into a covariance matrix. The crate
//! provides the metrics, the covariance assembly, CAR baselines, MCMC
//! fitting for Gaussian and Poisson-GLM data, and experiment harnesses.

pub mod baselines;
pub mod covariance;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use graph::{build_graph, laplacian, pinv_power, EdgeWeights, Graph, Laplacian, PseudoInversePower};
pub use metrics::{
    certify_euclidean, delta_m, hollow_transform, quasi_euclidean, resistance, shortest_path, DistanceMatrix,
    EuclideanCertificate, MetricTag,
};
pub use covariance::{build_sigma, matern_rho, rescale_range, to_correlation, CovarianceMatrix, Matern, MaternSpec, RescaledRange};
pub use baselines::{car1_sigma, carw_sigma, Car1Params, CarwParams};
pub use inference::{fit_gaussian, fit_glm, Chain, GlmData, McmcConfig, ModelState, PriorSpec};
