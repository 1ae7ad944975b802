use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::covariance::DEFAULT_NU;
use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};
use crate::linalg::Matrix;
use crate::metrics::{quasi_euclidean, DistanceMatrix, MetricTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub nu: f64,
    /// Sample a nugget `ψ`. Without it `ψ = 0` and `σ²` has a Gibbs update.
    pub estimate_nugget: bool,
    pub initial_sigma2: f64,
    pub initial_psi: f64,
    pub initial_weights: Option<Vec<f64>>,
    /// Starting log-scale proposal sd for weight blocks and variances.
    pub proposal_sd: f64,
    pub adapt: bool,
    pub target_acceptance: f64,
    /// Replace the likelihood by a constant; the chain then targets the prior.
    pub ignore_likelihood: bool,
    /// Fix `σ² = 1`, `ψ = 0` so every `Σ` is a correlation matrix.
    pub correlation_scaled: bool,
    pub store_theta: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in: 2_500,
            thin: 1,
            seed: 0,
            nu: DEFAULT_NU,
            estimate_nugget: false,
            initial_sigma2: 1.0,
            initial_psi: 0.1,
            initial_weights: None,
            proposal_sd: 0.3,
            adapt: true,
            target_acceptance: 0.30,
            ignore_likelihood: false,
            correlation_scaled: false,
            store_theta: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if !(self.nu > 0.0) {
            return Err(Error::InvalidConfig(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.proposal_sd >= 0.0 && self.proposal_sd.is_finite()) {
            return Err(Error::InvalidConfig("proposal_sd must be nonnegative".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidConfig("target_acceptance must lie in (0, 1)".into()));
        }
        if !(self.initial_sigma2 > 0.0) || !(self.initial_psi > 0.0) {
            return Err(Error::InvalidConfig("initial variances must be positive".into()));
        }
        if self.estimate_nugget && self.correlation_scaled {
            return Err(Error::InvalidConfig("correlation_scaled excludes a nugget".into()));
        }
        Ok(())
    }

    /// Number of draws kept after burn-in and thinning.
    pub fn kept_draws(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    pub fn keeps(&self, completed: usize) -> bool {
        completed > self.burn_in && (completed - self.burn_in) % self.thin == 0
    }
}

/// Full parameter state of one sweep. Edge weights are stored in the order
/// of [`Graph::edges`]; the GLM-only fields are empty for Gaussian fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub sigma2: f64,
    pub psi: f64,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub beta0: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub sigma2_0: Option<f64>,
    #[serde(default)]
    pub sigma2_beta: Option<f64>,
    #[serde(default)]
    pub theta: Option<Matrix>,
}

impl ModelState {
    pub fn check_invariants(&self) -> bool {
        self.sigma2 > 0.0
            && self.psi >= 0.0
            && self.weights.iter().all(|w| *w > 0.0 && w.is_finite())
            && self.sigma2_0.is_none_or(|v| v > 0.0)
            && self.sigma2_beta.is_none_or(|v| v > 0.0)
    }

    pub fn edge_weights(&self, graph: &Arc<Graph>) -> Result<EdgeWeights> {
        EdgeWeights::from_edge_values(graph, self.weights.clone())
    }

    pub fn variance_ratio(&self) -> f64 {
        self.sigma2 / (self.sigma2 + self.psi)
    }
}

/// Robbins-Monro tuned log-scale random-walk step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveScale {
    pub sd: f64,
    pub proposed: u64,
    pub accepted: u64,
    pub proposed_kept: u64,
    pub accepted_kept: u64,
}

impl AdaptiveScale {
    pub fn new(sd: f64) -> Self {
        Self { sd, proposed: 0, accepted: 0, proposed_kept: 0, accepted_kept: 0 }
    }

    pub fn record(&mut self, accepted: bool, burning_in: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
        if !burning_in {
            self.proposed_kept += 1;
            self.accepted_kept += accepted as u64;
        }
    }

    pub fn adapt(&mut self, accepted: bool, iteration: usize, target: f64) {
        if self.sd == 0.0 {
            return;
        }
        let gamma = (iteration as f64 + 1.0).powf(-0.6);
        let a = if accepted { 1.0 } else { 0.0 };
        self.sd = (self.sd * (gamma * (a - target)).exp()).clamp(1e-4, 10.0);
    }

    /// Post-burn-in acceptance rate, or the overall rate before that.
    pub fn rate(&self) -> f64 {
        if self.proposed_kept > 0 {
            self.accepted_kept as f64 / self.proposed_kept as f64
        } else if self.proposed > 0 {
            self.accepted as f64 / self.proposed as f64
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    /// One rate per node block.
    pub weight_blocks: Vec<f64>,
    /// Joint `(σ², ψ)` step, when it is a Metropolis update.
    pub variances: Option<f64>,
    /// Proposals rejected because the covariance could not be evaluated.
    pub numerical_rejections: u64,
}

impl Acceptance {
    pub fn mean_weight_rate(&self) -> f64 {
        if self.weight_blocks.is_empty() {
            return 0.0;
        }
        self.weight_blocks.iter().sum::<f64>() / self.weight_blocks.len() as f64
    }
}

/// Scalar quantity extracted from each draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamSelector {
    Sigma2,
    Psi,
    Weight(usize),
    Beta0(usize),
    Beta(usize),
    Sigma2Zero,
    Sigma2Beta,
    VarianceRatio,
}

impl ParamSelector {
    pub fn extract(&self, s: &ModelState) -> f64 {
        match *self {
            ParamSelector::Sigma2 => s.sigma2,
            ParamSelector::Psi => s.psi,
            ParamSelector::Weight(e) => s.weights[e],
            ParamSelector::Beta0(i) => s.beta0[i],
            ParamSelector::Beta(k) => s.beta[k],
            ParamSelector::Sigma2Zero => s.sigma2_0.unwrap_or(f64::NAN),
            ParamSelector::Sigma2Beta => s.sigma2_beta.unwrap_or(f64::NAN),
            ParamSelector::VarianceRatio => s.variance_ratio(),
        }
    }

    pub fn name(&self, graph: &Graph) -> String {
        match *self {
            ParamSelector::Sigma2 => "sigma2".into(),
            ParamSelector::Psi => "psi".into(),
            ParamSelector::Weight(e) => {
                let (j, k) = graph.edges()[e];
                format!("w_{j}_{k}")
            }
            ParamSelector::Beta0(i) => format!("beta0_{i}"),
            ParamSelector::Beta(k) => format!("beta_{k}"),
            ParamSelector::Sigma2Zero => "sigma2_0".into(),
            ParamSelector::Sigma2Beta => "sigma2_beta".into(),
            ParamSelector::VarianceRatio => "variance_ratio".into(),
        }
    }
}

/// Post-burn-in draws of one chain.
#[derive(Debug, Clone)]
pub struct Chain {
    pub graph: Arc<Graph>,
    pub states: Vec<ModelState>,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub nu: f64,
    pub acceptance: Acceptance,
    /// Running posterior mean of the latent log-rates (GLM fits).
    pub theta_mean: Option<Matrix>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn trace(&self, sel: ParamSelector) -> Vec<f64> {
        self.states.iter().map(|s| sel.extract(s)).collect()
    }

    /// Selectors for every sampled scalar, in a stable order.
    pub fn selectors(&self) -> Vec<ParamSelector> {
        let Some(first) = self.states.first() else { return Vec::new() };
        let mut out = vec![ParamSelector::Sigma2];
        if self.states.iter().any(|s| s.psi > 0.0) {
            out.push(ParamSelector::Psi);
        }
        out.extend((0..first.weights.len()).map(ParamSelector::Weight));
        out.extend((0..first.beta0.len()).map(ParamSelector::Beta0));
        out.extend((0..first.beta.len()).map(ParamSelector::Beta));
        if first.sigma2_0.is_some() {
            out.push(ParamSelector::Sigma2Zero);
        }
        if first.sigma2_beta.is_some() {
            out.push(ParamSelector::Sigma2Beta);
        }
        out
    }

    pub fn mean(&self, sel: ParamSelector) -> f64 {
        let t = self.trace(sel);
        t.iter().sum::<f64>() / t.len() as f64
    }

    /// Equal-tailed credible interval at `level`.
    pub fn credible_interval(&self, sel: ParamSelector, level: f64) -> (f64, f64) {
        let t = self.trace(sel);
        let a = (1.0 - level) / 2.0;
        (quantile(&t, a), quantile(&t, 1.0 - a))
    }

    pub fn posterior_mean_weights(&self) -> Vec<f64> {
        let m = self.graph.edge_count();
        let mut acc = vec![0.0; m];
        for s in &self.states {
            for (a, w) in acc.iter_mut().zip(&s.weights) {
                *a += w;
            }
        }
        acc.iter().map(|a| a / self.states.len() as f64).collect()
    }

    /// Posterior mean of the quasi-Euclidean distance matrix.
    pub fn posterior_mean_distance(&self) -> Result<DistanceMatrix> {
        if self.states.is_empty() {
            return Err(Error::ChainTooShort { len: 0, min: 1 });
        }
        let p = self.graph.node_count();
        let mut acc = Matrix::zeros(p, p);
        for s in &self.states {
            acc += quasi_euclidean(&s.edge_weights(&self.graph)?)?.matrix();
        }
        acc /= self.states.len() as f64;
        DistanceMatrix::new(acc, MetricTag::quasi_euclidean())
    }
}

/// Linearly interpolated sample quantile.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        assert_eq!(quantile(&xs, 0.05), 5.0);
        assert_eq!(quantile(&xs, 0.5), 50.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
    }

    #[test]
    fn kept_draws_respects_thinning() {
        let c = McmcConfig { iterations: 100, burn_in: 20, thin: 4, ..McmcConfig::default() };
        let kept = (1..=100).filter(|&t| c.keeps(t)).count();
        assert_eq!(kept, c.kept_draws());
        assert_eq!(kept, 20);
    }

    #[test]
    fn adaptation_moves_towards_target() {
        let mut s = AdaptiveScale::new(1.0);
        for t in 0..50 {
            s.adapt(false, t, 0.3);
        }
        assert!(s.sd < 1.0);
        let mut z = AdaptiveScale::new(0.0);
        z.adapt(false, 0, 0.3);
        assert_eq!(z.sd, 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(McmcConfig::default().validate().is_ok());
        assert!(McmcConfig { iterations: 10, burn_in: 10, ..McmcConfig::default() }.validate().is_err());
        assert!(McmcConfig { thin: 0, ..McmcConfig::default() }.validate().is_err());
    }
}
