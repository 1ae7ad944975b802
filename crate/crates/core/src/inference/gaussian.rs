use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::prior::{inv_gamma_logpdf, PriorSpec};
use super::state::{Acceptance, AdaptiveScale, Chain, McmcConfig, ModelState};
use crate::covariance::{quasi_euclidean_correlation, CovarianceMatrix, Matern};
use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};
use crate::linalg::{chol_logdet, cholesky, scatter, Matrix};
use crate::rng::{stream_rng, ChainRng};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Sufficient statistics `(n, YᵀY)` of a mean-zero Gaussian sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianStats {
    pub n: usize,
    pub scatter: Matrix,
}

impl GaussianStats {
    pub fn from_data(y: &Matrix) -> Self {
        Self { n: y.nrows(), scatter: scatter(y) }
    }

    pub fn empty(p: usize) -> Self {
        Self { n: 0, scatter: Matrix::zeros(p, p) }
    }

    pub fn dim(&self) -> usize {
        self.scatter.nrows()
    }

    /// `Σᵢ log N(yᵢ; 0, Σ)` from one Cholesky factorization.
    pub fn log_likelihood(&self, sigma: &Matrix) -> Result<f64> {
        if self.n == 0 {
            return Ok(0.0);
        }
        if sigma.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{}, data have {} columns",
                sigma.nrows(),
                sigma.ncols(),
                self.dim()
            )));
        }
        let chol = cholesky(sigma)?;
        let n = self.n as f64;
        let p = self.dim() as f64;
        let tr = chol.solve(&self.scatter).trace();
        Ok(-0.5 * (n * p * LN_2PI + n * chol_logdet(&chol) + tr))
    }
}

pub fn log_likelihood_gaussian(y: &Matrix, sigma: &CovarianceMatrix) -> Result<f64> {
    GaussianStats::from_data(y).log_likelihood(sigma.matrix())
}

/// Exact full conditional of `σ²` given the correlation matrix `R`:
/// `IG(a + np/2, b + tr(R⁻¹ YᵀY)/2)`. Only available without a nugget.
pub fn gibbs_sigma2<R: Rng + ?Sized>(
    stats: &GaussianStats,
    corr: &Matrix,
    psi: f64,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<f64> {
    if psi != 0.0 {
        return Err(Error::ConjugacyUnavailable { psi });
    }
    let mut rate = prior.b_sigma2;
    if stats.n > 0 {
        rate += 0.5 * cholesky(corr)?.solve(&stats.scatter).trace();
    }
    let shape = prior.a_sigma2 + 0.5 * (stats.n * stats.dim()) as f64;
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(1.0 / g.sample(rng))
}

fn is_numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::NumericalRankDeficiency { .. }
            | Error::NotPositiveDefinite
            | Error::InvalidWeights(_)
            | Error::Domain(_)
            | Error::DegenerateDistance
    )
}

/// The `(σ², ψ, W)` part of a sampler, shared by the Gaussian and GLM fits.
#[derive(Debug, Clone)]
pub(crate) struct CovarianceUpdater {
    graph: Arc<Graph>,
    prior: PriorSpec,
    matern: Matern,
    blocks: Vec<Vec<usize>>,
    config: McmcConfig,
    pub sigma2: f64,
    pub psi: f64,
    pub weights: Vec<f64>,
    corr: Matrix,
    loglik: f64,
    pub weight_scales: Vec<AdaptiveScale>,
    pub variance_scale: AdaptiveScale,
    pub numerical_rejections: u64,
}

impl CovarianceUpdater {
    pub fn new(graph: Arc<Graph>, prior: PriorSpec, config: &McmcConfig) -> Result<Self> {
        prior.validate(&graph)?;
        config.validate()?;
        let m = graph.edge_count();
        let weights = match &config.initial_weights {
            Some(w) if w.len() != m => {
                return Err(Error::DimensionMismatch(format!("{} initial weights for {m} edges", w.len())))
            }
            Some(w) => w.clone(),
            None => (0..m).map(|e| prior.weight_shape(e) / prior.b_w).collect(),
        };
        let sigma2 = if config.correlation_scaled { 1.0 } else { config.initial_sigma2 };
        let psi = if config.estimate_nugget { config.initial_psi } else { 0.0 };
        let p = graph.node_count();
        let blocks = (0..p).map(|j| graph.incident_edges(j)).collect();
        let mut out = Self {
            matern: Matern::new(config.nu)?,
            blocks,
            config: config.clone(),
            sigma2,
            psi,
            corr: Matrix::identity(p, p),
            loglik: 0.0,
            weight_scales: vec![AdaptiveScale::new(config.proposal_sd); p],
            variance_scale: AdaptiveScale::new(config.proposal_sd),
            numerical_rejections: 0,
            weights,
            graph,
            prior,
        };
        out.corr = out.correlation(&out.weights)?;
        Ok(out)
    }

    fn correlation(&self, weights: &[f64]) -> Result<Matrix> {
        let w = EdgeWeights::from_edge_values(&self.graph, weights.to_vec())?;
        quasi_euclidean_correlation(&w, &self.matern)
    }

    pub fn sigma_matrix(&self) -> Matrix {
        sigma_of(&self.corr, self.sigma2, self.psi)
    }

    fn eval(&self, stats: &GaussianStats, sigma2: f64, psi: f64, corr: &Matrix) -> Result<f64> {
        if self.config.ignore_likelihood {
            return Ok(0.0);
        }
        stats.log_likelihood(&sigma_of(corr, sigma2, psi))
    }

    /// Recompute the cached log-likelihood after the data changed.
    pub fn refresh(&mut self, stats: &GaussianStats) -> Result<()> {
        self.loglik = self.eval(stats, self.sigma2, self.psi, &self.corr)?;
        Ok(())
    }

    /// Restore parameters and tuning from a checkpoint.
    pub fn restore(&mut self, cp: &Checkpoint, stats: &GaussianStats) -> Result<()> {
        if cp.state.weights.len() != self.graph.edge_count() || cp.weight_scales.len() != self.graph.node_count() {
            return Err(Error::DimensionMismatch("checkpoint does not match the graph".into()));
        }
        self.sigma2 = cp.state.sigma2;
        self.psi = cp.state.psi;
        self.weights = cp.state.weights.clone();
        self.weight_scales = cp.weight_scales.clone();
        self.variance_scale = cp.variance_scale.clone();
        self.numerical_rejections = cp.numerical_rejections;
        self.corr = self.correlation(&self.weights)?;
        self.refresh(stats)
    }

    pub fn update_variances<R: Rng + ?Sized>(
        &mut self,
        stats: &GaussianStats,
        iteration: usize,
        burning_in: bool,
        rng: &mut R,
    ) -> Result<()> {
        if self.config.correlation_scaled {
            return Ok(());
        }
        if !self.config.estimate_nugget {
            let empty;
            let st = if self.config.ignore_likelihood {
                empty = GaussianStats::empty(stats.dim());
                &empty
            } else {
                stats
            };
            self.sigma2 = gibbs_sigma2(st, &self.corr, 0.0, &self.prior, rng)?;
            self.loglik = self.eval(stats, self.sigma2, self.psi, &self.corr)?;
            return Ok(());
        }
        let sd = self.variance_scale.sd;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        let s2 = self.sigma2 * (sd * z1).exp();
        let psi = self.psi * (sd * z2).exp();
        let pr = &self.prior;
        let mut log_r = inv_gamma_logpdf(s2, pr.a_sigma2, pr.b_sigma2)
            - inv_gamma_logpdf(self.sigma2, pr.a_sigma2, pr.b_sigma2)
            + inv_gamma_logpdf(psi, pr.a_psi, pr.b_psi)
            - inv_gamma_logpdf(self.psi, pr.a_psi, pr.b_psi)
            + (s2 / self.sigma2).ln()
            + (psi / self.psi).ln();
        let accepted = match self.eval(stats, s2, psi, &self.corr) {
            Ok(ll) => {
                log_r += ll - self.loglik;
                if u.ln() < log_r && s2.is_finite() && psi.is_finite() && psi > 0.0 && s2 > 0.0 {
                    self.sigma2 = s2;
                    self.psi = psi;
                    self.loglik = ll;
                    true
                } else {
                    false
                }
            }
            Err(e) if is_numerical(&e) => {
                self.numerical_rejections += 1;
                false
            }
            Err(e) => return Err(e),
        };
        self.variance_scale.record(accepted, burning_in);
        if burning_in && self.config.adapt {
            self.variance_scale.adapt(accepted, iteration, self.config.target_acceptance);
        }
        Ok(())
    }

    /// One sweep of node-wise block updates; returns the acceptance flag of
    /// each node block.
    pub fn update_weights<R: Rng + ?Sized>(
        &mut self,
        stats: &GaussianStats,
        iteration: usize,
        burning_in: bool,
        rng: &mut R,
    ) -> Result<Vec<bool>> {
        let p = self.graph.node_count();
        let mut flags = Vec::with_capacity(p);
        let mut proposal = self.weights.clone();
        for node in 0..p {
            let sd = self.weight_scales[node].sd;
            let mut log_r = 0.0;
            let mut valid = true;
            for &e in &self.blocks[node] {
                let z: f64 = rng.sample(StandardNormal);
                let old = self.weights[e];
                let new = old * (sd * z).exp();
                valid &= new > 0.0 && new.is_finite();
                proposal[e] = new;
                log_r += self.prior.log_prior_weight(e, new) - self.prior.log_prior_weight(e, old) + (new / old).ln();
            }
            let u: f64 = rng.random();
            let accepted = if sd == 0.0 {
                true
            } else if !valid {
                self.numerical_rejections += 1;
                false
            } else if self.config.ignore_likelihood {
                u.ln() < log_r
            } else {
                match self
                    .correlation(&proposal)
                    .and_then(|corr| Ok((self.eval(stats, self.sigma2, self.psi, &corr)?, corr)))
                {
                    Ok((ll, corr)) => {
                        log_r += ll - self.loglik;
                        if u.ln() < log_r {
                            self.corr = corr;
                            self.loglik = ll;
                            true
                        } else {
                            false
                        }
                    }
                    Err(e) if is_numerical(&e) => {
                        self.numerical_rejections += 1;
                        false
                    }
                    Err(e) => return Err(e),
                }
            };
            for &e in &self.blocks[node] {
                if accepted {
                    self.weights[e] = proposal[e];
                } else {
                    proposal[e] = self.weights[e];
                }
            }
            let scale = &mut self.weight_scales[node];
            scale.record(accepted, burning_in);
            if burning_in && self.config.adapt {
                scale.adapt(accepted, iteration, self.config.target_acceptance);
            }
            flags.push(accepted);
        }
        Ok(flags)
    }

    pub fn acceptance(&self) -> Acceptance {
        Acceptance {
            weight_blocks: self.weight_scales.iter().map(|s| s.rate()).collect(),
            variances: self.config.estimate_nugget.then(|| self.variance_scale.rate()),
            numerical_rejections: self.numerical_rejections,
        }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn config(&self) -> &McmcConfig {
        &self.config
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }
}

fn sigma_of(corr: &Matrix, sigma2: f64, psi: f64) -> Matrix {
    let mut s = corr * sigma2;
    for i in 0..s.nrows() {
        s[(i, i)] += psi;
    }
    s
}

/// Serializable sampler position: enough to continue a chain bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub kind: SamplerKind,
    pub iteration: usize,
    pub state: ModelState,
    pub weight_scales: Vec<AdaptiveScale>,
    pub variance_scale: AdaptiveScale,
    pub numerical_rejections: u64,
    pub rng: ChainRng,
    #[serde(default)]
    pub theta_sum: Option<Matrix>,
    #[serde(default)]
    pub theta_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Gaussian,
    Glm,
}

/// A resumable MCMC kernel.
pub trait Sampler {
    /// Advance by one full sweep.
    fn sweep(&mut self) -> Result<()>;
    /// Completed sweeps.
    fn iteration(&self) -> usize;
    fn state(&self) -> ModelState;
    fn config(&self) -> &McmcConfig;
    fn graph(&self) -> &Arc<Graph>;
    fn acceptance(&self) -> Acceptance;
    fn checkpoint(&self) -> Checkpoint;
    fn theta_mean(&self) -> Option<Matrix> {
        None
    }
}

/// Sweep until `until` iterations are complete, handing each kept draw to
/// `on_draw` together with its iteration number.
pub fn run_sampler<S: Sampler>(
    sampler: &mut S,
    until: usize,
    mut on_draw: impl FnMut(usize, &ModelState) -> Result<()>,
) -> Result<()> {
    while sampler.iteration() < until {
        sampler.sweep()?;
        let t = sampler.iteration();
        if sampler.config().keeps(t) {
            let s = sampler.state();
            debug_assert!(s.check_invariants(), "invalid state at iteration {t}");
            on_draw(t, &s)?;
        }
    }
    Ok(())
}

pub fn assemble_chain<S: Sampler>(sampler: &S, states: Vec<ModelState>) -> Result<Chain> {
    if states.is_empty() {
        return Err(Error::ChainTooShort { len: 0, min: 1 });
    }
    let c = sampler.config();
    Ok(Chain {
        graph: Arc::clone(sampler.graph()),
        states,
        burn_in: c.burn_in,
        thin: c.thin,
        seed: c.seed,
        nu: c.nu,
        acceptance: sampler.acceptance(),
        theta_mean: sampler.theta_mean(),
    })
}

/// Run a fresh sampler to completion.
pub fn run_chain<S: Sampler>(sampler: &mut S) -> Result<Chain> {
    let mut states = Vec::with_capacity(sampler.config().kept_draws());
    let until = sampler.config().iterations;
    run_sampler(sampler, until, |_, s| {
        states.push(s.clone());
        Ok(())
    })?;
    assemble_chain(sampler, states)
}

/// Metropolis-within-Gibbs sampler for `yᵢ ~ N(0, σ² ρ_ν(Δ(W)) + ψ I)`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    cov: CovarianceUpdater,
    stats: GaussianStats,
    iteration: usize,
    rng: ChainRng,
}

impl GaussianSampler {
    pub fn new(y: &Matrix, graph: Arc<Graph>, prior: PriorSpec, config: McmcConfig) -> Result<Self> {
        if y.ncols() != graph.node_count() {
            return Err(Error::DimensionMismatch(format!(
                "data have {} columns, graph has {} nodes",
                y.ncols(),
                graph.node_count()
            )));
        }
        Self::from_stats(GaussianStats::from_data(y), graph, prior, config)
    }

    pub fn from_stats(stats: GaussianStats, graph: Arc<Graph>, prior: PriorSpec, config: McmcConfig) -> Result<Self> {
        if stats.dim() != graph.node_count() {
            return Err(Error::DimensionMismatch(format!(
                "statistics are {}-dimensional, graph has {} nodes",
                stats.dim(),
                graph.node_count()
            )));
        }
        let rng = stream_rng(config.seed, 0);
        let mut cov = CovarianceUpdater::new(graph, prior, &config)?;
        cov.refresh(&stats)?;
        Ok(Self { cov, stats, iteration: 0, rng })
    }

    /// Rebuild a sampler at a saved position.
    pub fn restore(
        y: &Matrix,
        graph: Arc<Graph>,
        prior: PriorSpec,
        config: McmcConfig,
        checkpoint: &Checkpoint,
    ) -> Result<Self> {
        if checkpoint.kind != SamplerKind::Gaussian {
            return Err(Error::InvalidConfig("checkpoint was written by a different sampler".into()));
        }
        let mut s = Self::new(y, graph, prior, config)?;
        s.cov.restore(checkpoint, &s.stats)?;
        s.iteration = checkpoint.iteration;
        s.rng = checkpoint.rng.clone();
        Ok(s)
    }

    /// Swap in new data, keeping the parameter state.
    pub fn set_data(&mut self, stats: GaussianStats) -> Result<()> {
        if stats.dim() != self.stats.dim() {
            return Err(Error::DimensionMismatch("new data have a different width".into()));
        }
        self.stats = stats;
        self.cov.refresh(&self.stats)
    }

    /// Gibbs (or joint Metropolis with a nugget) update of the variances.
    pub fn update_variances(&mut self) -> Result<()> {
        let burning = self.iteration < self.cov.config().burn_in;
        self.cov.update_variances(&self.stats, self.iteration, burning, &mut self.rng)
    }

    /// Node-wise block Metropolis-Hastings sweep over the edge weights.
    pub fn mh_update_weights(&mut self) -> Result<Vec<bool>> {
        let burning = self.iteration < self.cov.config().burn_in;
        self.cov.update_weights(&self.stats, self.iteration, burning, &mut self.rng)
    }

    pub fn covariance(&self) -> Matrix {
        self.cov.sigma_matrix()
    }
}

impl Sampler for GaussianSampler {
    fn sweep(&mut self) -> Result<()> {
        self.update_variances()?;
        self.mh_update_weights()?;
        self.iteration += 1;
        Ok(())
    }

    fn iteration(&self) -> usize {
        self.iteration
    }

    fn state(&self) -> ModelState {
        ModelState {
            sigma2: self.cov.sigma2,
            psi: self.cov.psi,
            weights: self.cov.weights.clone(),
            beta0: Vec::new(),
            beta: Vec::new(),
            sigma2_0: None,
            sigma2_beta: None,
            theta: None,
        }
    }

    fn config(&self) -> &McmcConfig {
        self.cov.config()
    }

    fn graph(&self) -> &Arc<Graph> {
        self.cov.graph()
    }

    fn acceptance(&self) -> Acceptance {
        self.cov.acceptance()
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            kind: SamplerKind::Gaussian,
            iteration: self.iteration,
            state: self.state(),
            weight_scales: self.cov.weight_scales.clone(),
            variance_scale: self.cov.variance_scale.clone(),
            numerical_rejections: self.cov.numerical_rejections,
            rng: self.rng.clone(),
            theta_sum: None,
            theta_count: 0,
        }
    }
}

/// Fit the Gaussian model to the rows of `y`.
pub fn fit_gaussian(y: &Matrix, graph: &Arc<Graph>, prior: &PriorSpec, config: &McmcConfig) -> Result<Chain> {
    let mut s = GaussianSampler::new(y, Arc::clone(graph), prior.clone(), config.clone())?;
    run_chain(&mut s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{build_sigma, MaternSpec};
    use crate::graph::build_graph;
    use rand::SeedableRng;

    fn naive_loglik(y: &Matrix, sigma: &Matrix) -> f64 {
        let inv = sigma.clone().try_inverse().unwrap();
        let det = sigma.determinant();
        let p = sigma.nrows() as f64;
        y.row_iter()
            .map(|r| {
                let v = r.transpose();
                -0.5 * (p * (2.0 * std::f64::consts::PI).ln() + det.ln() + (v.transpose() * &inv * &v)[(0, 0)])
            })
            .sum()
    }

    fn five_node() -> Arc<Graph> {
        Arc::new(build_graph(5, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (1, 4), (2, 4), (3, 4)]).unwrap())
    }

    #[test]
    fn zero_row_standard_normal() {
        let y = Matrix::zeros(1, 4);
        let s = CovarianceMatrix::external(Matrix::identity(4, 4)).unwrap();
        let ll = log_likelihood_gaussian(&y, &s).unwrap();
        assert!((ll + 2.0 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-13);
    }

    #[test]
    fn matches_naive_density_and_doubles() {
        let g = five_node();
        let w = EdgeWeights::from_edge_values(&g, vec![0.5, 1.0, 2.0, 0.3, 0.7, 1.1, 0.9, 1.6]).unwrap();
        let sigma = build_sigma(&w, &MaternSpec::new(1.5, 1.3).unwrap(), 0.2).unwrap();
        let y = Matrix::from_fn(7, 5, |i, j| ((i * 5 + j) as f64 * 0.37).sin() * 1.7);
        let ll = log_likelihood_gaussian(&y, &sigma).unwrap();
        assert!((ll - naive_loglik(&y, sigma.matrix())).abs() < 1e-8);
        let stacked = Matrix::from_fn(14, 5, |i, j| y[(i % 7, j)]);
        let ll2 = log_likelihood_gaussian(&stacked, &sigma).unwrap();
        assert!((ll2 - 2.0 * ll).abs() < 1e-9 * ll.abs());
    }

    #[test]
    fn gibbs_requires_zero_nugget() {
        let mut rng = ChainRng::seed_from_u64(1);
        let stats = GaussianStats::empty(3);
        let r = gibbs_sigma2(&stats, &Matrix::identity(3, 3), 0.1, &PriorSpec::default(), &mut rng);
        assert!(matches!(r, Err(Error::ConjugacyUnavailable { .. })));
    }

    #[test]
    fn gibbs_shape_with_identity_correlation() {
        // R = I: the conditional is IG(a + np/2, b + ||Y||²/2), whose mean is
        // rate / (shape − 1)
        let mut rng = ChainRng::seed_from_u64(2);
        let y = Matrix::from_fn(40, 3, |i, j| ((i * 3 + j) as f64).cos());
        let stats = GaussianStats::from_data(&y);
        let prior = PriorSpec::default();
        let shape = prior.a_sigma2 + 60.0;
        let rate = prior.b_sigma2 + 0.5 * y.norm_squared();
        let draws: Vec<f64> = (0..20000)
            .map(|_| gibbs_sigma2(&stats, &Matrix::identity(3, 3), 0.0, &prior, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let want = rate / (shape - 1.0);
        assert!((mean - want).abs() < 0.01 * want);
    }

    #[test]
    fn zero_proposal_sd_never_moves() {
        let g = five_node();
        let y = Matrix::from_fn(20, 5, |i, j| ((i + 2 * j) as f64).sin());
        let config = McmcConfig {
            iterations: 30,
            burn_in: 10,
            proposal_sd: 0.0,
            adapt: false,
            ..McmcConfig::default()
        };
        let start = GaussianSampler::new(&y, Arc::clone(&g), PriorSpec::default(), config.clone()).unwrap().state();
        let chain = fit_gaussian(&y, &g, &PriorSpec::default(), &config).unwrap();
        assert!(chain.states.iter().all(|s| s.weights == start.weights));
        assert!(chain.acceptance.weight_blocks.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn same_seed_same_chain() {
        let g = five_node();
        let y = Matrix::from_fn(15, 5, |i, j| ((3 * i + j) as f64 * 0.7).sin());
        let config = McmcConfig { iterations: 60, burn_in: 20, seed: 9, estimate_nugget: true, ..McmcConfig::default() };
        let a = fit_gaussian(&y, &g, &PriorSpec::default(), &config).unwrap();
        let b = fit_gaussian(&y, &g, &PriorSpec::default(), &config).unwrap();
        assert_eq!(a.states, b.states);
        let c = fit_gaussian(&y, &g, &PriorSpec::default(), &McmcConfig { seed: 10, ..config }).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn checkpoint_resume_is_exact() {
        let g = five_node();
        let y = Matrix::from_fn(12, 5, |i, j| ((i * j) as f64 * 0.3 + j as f64).cos());
        let config = McmcConfig { iterations: 50, burn_in: 10, seed: 4, estimate_nugget: true, ..McmcConfig::default() };
        let full = fit_gaussian(&y, &g, &PriorSpec::default(), &config).unwrap();

        let mut s = GaussianSampler::new(&y, Arc::clone(&g), PriorSpec::default(), config.clone()).unwrap();
        let mut states = Vec::new();
        run_sampler(&mut s, 23, |_, st| {
            states.push(st.clone());
            Ok(())
        })
        .unwrap();
        let json = serde_json::to_string(&s.checkpoint()).unwrap();
        let cp: Checkpoint = serde_json::from_str(&json).unwrap();
        let mut r = GaussianSampler::restore(&y, Arc::clone(&g), PriorSpec::default(), config, &cp).unwrap();
        run_sampler(&mut r, 50, |_, st| {
            states.push(st.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(states, full.states);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let g = five_node();
        let y = Matrix::zeros(4, 3);
        assert!(matches!(
            fit_gaussian(&y, &g, &PriorSpec::default(), &McmcConfig::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
