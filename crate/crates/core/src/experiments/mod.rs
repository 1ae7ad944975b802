//! Reproduction harnesses and synthetic data.

pub mod fixtures;
mod hetero;
mod kl;
mod scores;
mod sim;
mod synthetic;

pub use hetero::{correlation_heterogeneity_test, sample_correlation, HeterogeneityTest};
pub use kl::{closest_in_class, kl_gaussian, kl_gaussian_matrices, simulate_stats, KlConfig, KlResult, ModelClass};
pub use scores::{edge_z_scores, edge_z_scores_from_values, variance_ratio, EdgeScore, VarianceRatio};
pub use sim::{run_sim_study, SimSetting, SimStudyConfig, SimStudyResult};
pub use synthetic::{generate_synthetic, SyntheticData, SyntheticKind};
