use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baselines::spectral_radius;
use crate::covariance::{correlation_of, quasi_euclidean_correlation, CovarianceMatrix, Matern, Provenance};
use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};
use crate::inference::{
    run_sampler, AdaptiveScale, GaussianSampler, GaussianStats, McmcConfig, PriorSpec,
};
use crate::linalg::{chol_logdet, cholesky, Matrix, Vector};
use crate::rng::{stream_rng, ChainRng};

/// `KL(N(0, Σ_a) ‖ N(0, Σ_b))`.
pub fn kl_gaussian(sigma_a: &CovarianceMatrix, sigma_b: &CovarianceMatrix) -> Result<f64> {
    kl_gaussian_matrices(sigma_a.matrix(), sigma_b.matrix())
}

pub fn kl_gaussian_matrices(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare {}x{} with {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let ca = cholesky(a)?;
    let cb = cholesky(b)?;
    let tr = cb.solve(a).trace();
    Ok(0.5 * (tr - a.nrows() as f64 + chol_logdet(&cb) - chol_logdet(&ca)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum ModelClass {
    QuasiEuclidean { nu: f64 },
    Car1,
    Carw,
}

impl ModelClass {
    pub fn name(&self) -> String {
        match self {
            ModelClass::QuasiEuclidean { .. } => "quasi-euclidean".into(),
            ModelClass::Car1 => "car1".into(),
            ModelClass::Carw => "carw".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KlConfig {
    /// Rows simulated from the target.
    pub samples: usize,
    pub mcmc: McmcConfig,
    pub prior: PriorSpec,
    /// Burn-in stages run on down-weighted data (`n` scaled by 10⁻ᵏ, …,
    /// 10⁻¹) so the chain reaches the mode before the posterior sharpens.
    pub tempering_stages: usize,
}

impl Default for KlConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            mcmc: McmcConfig { iterations: 20_000, burn_in: 10_000, thin: 5, ..McmcConfig::default() },
            prior: PriorSpec::default(),
            tempering_stages: 4,
        }
    }
}

/// `(end iteration, statistics)` for each tempered burn-in stage.
fn tempering_schedule(stats: &GaussianStats, burn_in: usize, stages: usize) -> Vec<(usize, GaussianStats)> {
    (0..stages)
        .map(|i| {
            let n = ((stats.n as f64) * 10f64.powi(-((stages - i) as i32))).round().max(1.0) as usize;
            let scaled = GaussianStats { n, scatter: &stats.scatter * (n as f64 / stats.n.max(1) as f64) };
            ((i + 1) * burn_in / (stages + 1), scaled)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct KlResult {
    pub model_name: String,
    /// `KL(N(0, Σ̂) ‖ N(0, target))`.
    pub kl: f64,
    /// `KL(N(0, target) ‖ N(0, Σ̂))`, the divergence the fit minimizes.
    pub kl_target_to_fit: f64,
    pub sigma_hat: CovarianceMatrix,
    pub mc_samples: usize,
}

/// Sufficient statistics of `n` rows drawn from `N(0, Σ)`.
pub fn simulate_stats(sigma: &Matrix, n: usize, rng: &mut ChainRng) -> Result<GaussianStats> {
    let l = cholesky(sigma)?.l();
    let p = sigma.nrows();
    let mut s = Matrix::zeros(p, p);
    for _ in 0..n {
        let z = Vector::from_fn(p, |_, _| rng.sample(StandardNormal));
        let y = &l * z;
        s.syger(1.0, &y, &y, 1.0);
    }
    s.fill_upper_triangle_with_lower_triangle();
    Ok(GaussianStats { n, scatter: s })
}

/// Approximate the member of `class` closest to `target`: fit the class by
/// MCMC to data simulated from the target, with every draw scaled to a
/// correlation matrix, and average the draws.
pub fn closest_in_class(
    target: &CovarianceMatrix,
    class: ModelClass,
    graph: &Arc<Graph>,
    config: &KlConfig,
) -> Result<KlResult> {
    let p = graph.node_count();
    if target.size() != p {
        return Err(Error::DimensionMismatch(format!("target is {}x{}, graph has {p} nodes", target.size(), target.size())));
    }
    let mut data_rng = stream_rng(config.mcmc.seed, 1);
    let stats = simulate_stats(target.matrix(), config.samples, &mut data_rng)?;
    let draws = match class {
        ModelClass::QuasiEuclidean { nu } => {
            let mcmc = McmcConfig { nu, correlation_scaled: true, estimate_nugget: false, ..config.mcmc.clone() };
            let matern = Matern::new(nu)?;
            let schedule = tempering_schedule(&stats, mcmc.burn_in, config.tempering_stages);
            let mut s = GaussianSampler::from_stats(stats.clone(), Arc::clone(graph), config.prior.clone(), mcmc.clone())?;
            for (until, st) in schedule {
                s.set_data(st)?;
                run_sampler(&mut s, until, |_, _| Ok(()))?;
            }
            s.set_data(stats)?;
            let mut draws = Vec::with_capacity(mcmc.kept_draws());
            run_sampler(&mut s, mcmc.iterations, |_, st| {
                let w = EdgeWeights::from_edge_values(graph, st.weights.clone())?;
                draws.push(quasi_euclidean_correlation(&w, &matern)?);
                Ok(())
            })?;
            draws
        }
        ModelClass::Car1 | ModelClass::Carw => {
            let schedule = tempering_schedule(&stats, config.mcmc.burn_in, config.tempering_stages);
            CarSampler::new(class == ModelClass::Carw, graph, &config.prior, stats, &config.mcmc)?.run(schedule)?
        }
    };
    if draws.is_empty() {
        return Err(Error::ChainTooShort { len: 0, min: 1 });
    }
    let mut mean = Matrix::zeros(p, p);
    for d in &draws {
        mean += d;
    }
    mean /= draws.len() as f64;
    let sigma_hat = CovarianceMatrix::new(
        correlation_of(&mean),
        Provenance {
            model: class.name(),
            metric: None,
            nu: match class {
                ModelClass::QuasiEuclidean { nu } => Some(nu),
                _ => None,
            },
            sigma2: 1.0,
            nugget: 0.0,
            correlation_scaled: true,
        },
    )?;
    Ok(KlResult {
        model_name: class.name(),
        kl: kl_gaussian(&sigma_hat, target)?,
        kl_target_to_fit: kl_gaussian(target, &sigma_hat)?,
        sigma_hat,
        mc_samples: config.samples,
    })
}

/// Random-walk sampler for the correlation-scaled CAR classes on the
/// unconstrained scale `(log W, atanh κ)`, with a uniform prior on `κ`.
struct CarSampler {
    weighted: bool,
    graph: Arc<Graph>,
    adjacency: Matrix,
    lambda: f64,
    prior: PriorSpec,
    stats: GaussianStats,
    config: McmcConfig,
    eta: Vec<f64>,
    blocks: Vec<Vec<usize>>,
    scales: Vec<AdaptiveScale>,
    log_post: f64,
    rng: ChainRng,
}

impl CarSampler {
    fn new(weighted: bool, graph: &Arc<Graph>, prior: &PriorSpec, stats: GaussianStats, config: &McmcConfig) -> Result<Self> {
        config.validate()?;
        prior.validate(graph)?;
        let m = graph.edge_count();
        let (eta, blocks) = if weighted {
            let mut eta: Vec<f64> = (0..m).map(|e| (prior.weight_shape(e) / prior.b_w).ln()).collect();
            eta.push(0.0);
            let mut blocks: Vec<Vec<usize>> = (0..graph.node_count()).map(|j| graph.incident_edges(j)).collect();
            blocks.push(vec![m]);
            (eta, blocks)
        } else {
            (vec![0.0], vec![vec![0]])
        };
        let adjacency = graph.adjacency();
        let mut s = Self {
            weighted,
            graph: Arc::clone(graph),
            lambda: spectral_radius(&adjacency),
            adjacency,
            prior: prior.clone(),
            stats,
            config: config.clone(),
            scales: vec![AdaptiveScale::new(config.proposal_sd); blocks.len()],
            eta,
            blocks,
            log_post: 0.0,
            rng: stream_rng(config.seed, 0),
        };
        s.log_post = s.evaluate(&s.eta)?.0;
        Ok(s)
    }

    fn correlation(&self, eta: &[f64]) -> Result<Matrix> {
        let kappa = eta.last().copied().unwrap_or(0.0).tanh();
        let q = if self.weighted {
            let w = EdgeWeights::from_edge_values(&self.graph, eta[..eta.len() - 1].iter().map(|v| v.exp()).collect())?;
            let mut q = w.matrix() * (-kappa);
            for j in 0..q.nrows() {
                q[(j, j)] = w.matrix().row(j).sum();
            }
            q
        } else {
            let p = self.adjacency.nrows();
            Matrix::identity(p, p) - &self.adjacency * (kappa / self.lambda)
        };
        Ok(correlation_of(&cholesky(&q)?.inverse()))
    }

    fn evaluate(&self, eta: &[f64]) -> Result<(f64, Matrix)> {
        let kappa = eta.last().copied().unwrap_or(0.0).tanh();
        let mut lp = (1.0 - kappa * kappa).ln();
        if self.weighted {
            for (e, v) in eta[..eta.len() - 1].iter().enumerate() {
                lp += self.prior.log_prior_weight(e, v.exp()) + v;
            }
        }
        if !lp.is_finite() {
            return Err(Error::Domain("parameter outside support".into()));
        }
        let corr = self.correlation(eta)?;
        Ok((lp + self.stats.log_likelihood(&corr)?, corr))
    }

    fn run(mut self, schedule: Vec<(usize, GaussianStats)>) -> Result<Vec<Matrix>> {
        let mut draws = Vec::with_capacity(self.config.kept_draws());
        let mut current = self.correlation(&self.eta)?;
        let full = self.stats.clone();
        let mut stages = schedule.into_iter().peekable();
        if let Some((_, st)) = stages.peek() {
            self.stats = st.clone();
            self.log_post = self.evaluate(&self.eta)?.0;
        }
        for it in 0..self.config.iterations {
            while let Some((until, _)) = stages.peek() {
                if it < *until {
                    break;
                }
                stages.next();
                self.stats = stages.peek().map_or_else(|| full.clone(), |(_, st)| st.clone());
                self.log_post = self.evaluate(&self.eta)?.0;
            }
            let burning = it < self.config.burn_in;
            for b in 0..self.blocks.len() {
                let sd = self.scales[b].sd;
                let mut prop = self.eta.clone();
                for &i in &self.blocks[b] {
                    prop[i] += sd * self.rng.sample::<f64, _>(StandardNormal);
                }
                let u: f64 = self.rng.random();
                let accepted = match self.evaluate(&prop) {
                    Ok((lp, corr)) if u.ln() < lp - self.log_post => {
                        self.eta = prop;
                        self.log_post = lp;
                        current = corr;
                        true
                    }
                    Ok(_) | Err(Error::NotPositiveDefinite | Error::Domain(_) | Error::InvalidWeights(_)) => false,
                    Err(e) => return Err(e),
                };
                self.scales[b].record(accepted, burning);
                if burning && self.config.adapt {
                    self.scales[b].adapt(accepted, it, self.config.target_acceptance);
                }
            }
            if self.config.keeps(it + 1) {
                draws.push(current.clone());
            }
        }
        Ok(draws)
    }
}
