//! Bayesian fitting: priors, the Gaussian and Poisson-GLM samplers, and
//! chain diagnostics.

mod diagnostics;
mod gaussian;
mod glm;
mod prior;
mod state;

pub use diagnostics::{chain_ess, effective_sample_size, ks_test, MIN_ESS_DRAWS};
pub use gaussian::{
    assemble_chain, fit_gaussian, gibbs_sigma2, log_likelihood_gaussian, run_chain, run_sampler, Checkpoint,
    GaussianSampler, GaussianStats, Sampler, SamplerKind,
};
pub use glm::{fit_glm, GlmData, GlmSampler};
pub use prior::{gamma_logpdf, inv_gamma_logpdf, PriorSpec};
pub use state::{quantile, Acceptance, AdaptiveScale, Chain, McmcConfig, ModelState, ParamSelector};
