use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::gaussian::{run_chain, Checkpoint, CovarianceUpdater, GaussianStats, Sampler, SamplerKind};
use super::prior::PriorSpec;
use super::state::{Acceptance, Chain, McmcConfig, ModelState};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{cholesky, Matrix, Vector};
use crate::rng::{stream_rng, ChainRng};

const MAX_SHRINKS: usize = 10_000;

/// Counts `y` (n×p), positive effort `t` (n×p) and node covariates `X` (p×q).
#[derive(Debug, Clone)]
pub struct GlmData {
    pub counts: Matrix,
    pub effort: Matrix,
    pub covariates: Matrix,
}

impl GlmData {
    pub fn new(counts: Matrix, effort: Matrix, covariates: Matrix) -> Result<Self> {
        let (n, p) = counts.shape();
        if effort.shape() != (n, p) {
            return Err(Error::DimensionMismatch(format!(
                "effort is {}x{}, counts are {n}x{p}",
                effort.nrows(),
                effort.ncols()
            )));
        }
        if covariates.nrows() != p {
            return Err(Error::DimensionMismatch(format!(
                "covariates have {} rows for {p} nodes",
                covariates.nrows()
            )));
        }
        if let Some(c) = counts.iter().find(|c| !(**c >= 0.0 && c.fract() == 0.0 && c.is_finite())) {
            return Err(Error::Domain(format!("counts must be nonnegative integers, got {c}")));
        }
        if let Some(t) = effort.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Domain(format!("effort must be positive, got {t}")));
        }
        if covariates.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("covariates must be finite".into()));
        }
        Ok(Self { counts, effort, covariates })
    }

    /// Unit effort, no covariates.
    pub fn counts_only(counts: Matrix) -> Result<Self> {
        let (n, p) = counts.shape();
        Self::new(counts, Matrix::from_element(n, p, 1.0), Matrix::zeros(p, 0))
    }
}

/// Sampler for `yᵢⱼ ~ Poisson(exp(θᵢⱼ) tᵢⱼ)`, `θᵢ ~ N(β₀ᵢ1 + Xβ, Σ(σ², W) + ψI)`.
#[derive(Debug, Clone)]
pub struct GlmSampler {
    cov: CovarianceUpdater,
    data: GlmData,
    log_effort: Matrix,
    theta: Matrix,
    beta0: Vector,
    beta: Vector,
    sigma2_0: f64,
    sigma2_beta: f64,
    iteration: usize,
    rng: ChainRng,
    theta_sum: Matrix,
    theta_count: usize,
}

impl GlmSampler {
    pub fn new(data: GlmData, graph: Arc<Graph>, prior: PriorSpec, config: McmcConfig) -> Result<Self> {
        let (n, p) = data.counts.shape();
        if p != graph.node_count() {
            return Err(Error::DimensionMismatch(format!("counts have {p} columns, graph has {} nodes", graph.node_count())));
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("no observations".into()));
        }
        let q = data.covariates.ncols();
        let log_effort = data.effort.map(f64::ln);
        let theta = Matrix::from_fn(n, p, |i, j| ((data.counts[(i, j)] + 0.5) / data.effort[(i, j)]).ln());
        let beta0 = Vector::from_fn(n, |i, _| theta.row(i).mean());
        let mut s = Self {
            cov: CovarianceUpdater::new(graph, prior, &config)?,
            log_effort,
            theta,
            beta0,
            beta: Vector::zeros(q),
            sigma2_0: 1.0,
            sigma2_beta: 1.0,
            iteration: 0,
            rng: stream_rng(config.seed, 0),
            theta_sum: Matrix::zeros(n, p),
            theta_count: 0,
            data,
        };
        let stats = s.residual_stats();
        s.cov.refresh(&stats)?;
        Ok(s)
    }

    pub fn restore(
        data: GlmData,
        graph: Arc<Graph>,
        prior: PriorSpec,
        config: McmcConfig,
        checkpoint: &Checkpoint,
    ) -> Result<Self> {
        if checkpoint.kind != SamplerKind::Glm {
            return Err(Error::InvalidConfig("checkpoint was written by a different sampler".into()));
        }
        let mut s = Self::new(data, graph, prior, config)?;
        let st = &checkpoint.state;
        let theta = st.theta.clone().ok_or_else(|| Error::InvalidConfig("checkpoint lacks theta".into()))?;
        if theta.shape() != s.theta.shape() || st.beta0.len() != s.beta0.len() || st.beta.len() != s.beta.len() {
            return Err(Error::DimensionMismatch("checkpoint does not match the data".into()));
        }
        s.theta = theta;
        s.beta0 = Vector::from_vec(st.beta0.clone());
        s.beta = Vector::from_vec(st.beta.clone());
        s.sigma2_0 = st.sigma2_0.unwrap_or(1.0);
        s.sigma2_beta = st.sigma2_beta.unwrap_or(1.0);
        s.iteration = checkpoint.iteration;
        s.rng = checkpoint.rng.clone();
        if let Some(sum) = &checkpoint.theta_sum {
            s.theta_sum = sum.clone();
        }
        s.theta_count = checkpoint.theta_count;
        let stats = s.residual_stats();
        s.cov.restore(checkpoint, &stats)?;
        Ok(s)
    }

    fn residual_stats(&self) -> GaussianStats {
        let xb = &self.data.covariates * &self.beta;
        let e = Matrix::from_fn(self.theta.nrows(), self.theta.ncols(), |i, j| {
            self.theta[(i, j)] - self.beta0[i] - xb[j]
        });
        GaussianStats { n: e.nrows(), scatter: e.transpose() * &e }
    }

    fn row_loglik(&self, i: usize, theta: &Vector) -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(j, &t)| self.data.counts[(i, j)] * t - (t + self.log_effort[(i, j)]).exp())
            .sum()
    }

    /// Elliptical slice sampling of every row of `θ` against its Gaussian prior.
    fn update_theta(&mut self, chol_l: &Matrix, xb: &Vector) {
        let p = self.theta.ncols();
        for i in 0..self.theta.nrows() {
            let mean = xb.add_scalar(self.beta0[i]);
            let current: Vector = self.theta.row(i).transpose();
            let f = &current - &mean;
            let z = Vector::from_fn(p, |_, _| self.rng.sample(StandardNormal));
            let nu = chol_l * z;
            let u: f64 = self.rng.random();
            let threshold = self.row_loglik(i, &current) + u.ln();
            let mut phi = self.rng.random::<f64>() * 2.0 * PI;
            let (mut lo, mut hi) = (phi - 2.0 * PI, phi);
            for _ in 0..MAX_SHRINKS {
                let cand = &mean + &f * phi.cos() + &nu * phi.sin();
                if self.row_loglik(i, &cand) > threshold {
                    self.theta.set_row(i, &cand.transpose());
                    break;
                }
                if phi < 0.0 {
                    lo = phi;
                } else {
                    hi = phi;
                }
                phi = lo + self.rng.random::<f64>() * (hi - lo);
            }
        }
    }

    /// Joint conjugate draw of `(β₀, β)` given `θ`, via the Schur complement
    /// of the diagonal `β₀` block.
    fn update_beta(&mut self, precision: &Matrix) -> Result<()> {
        let n = self.theta.nrows();
        let q = self.beta.len();
        let x = &self.data.covariates;
        let a = precision.column_sum();
        let s11 = a.sum();
        let d = s11 + 1.0 / self.sigma2_0;
        let g = x.transpose() * &a;
        let b0 = &self.theta * &a;
        if q > 0 {
            let px = precision * x;
            let mut schur = x.transpose() * &px * n as f64 - &g * g.transpose() * (n as f64 / d);
            for k in 0..q {
                schur[(k, k)] += 1.0 / self.sigma2_beta;
            }
            let theta_sum = self.theta.row_sum().transpose();
            let bb = px.transpose() * theta_sum - &g * (b0.sum() / d);
            let chol = cholesky(&schur)?;
            let m = chol.solve(&bb);
            let z = Vector::from_fn(q, |_, _| self.rng.sample(StandardNormal));
            let noise = chol
                .l()
                .transpose()
                .solve_upper_triangular(&z)
                .ok_or(Error::NotPositiveDefinite)?;
            self.beta = m + noise;
        }
        let gb = g.dot(&self.beta);
        let sd = d.sqrt().recip();
        for i in 0..n {
            let z: f64 = self.rng.sample(StandardNormal);
            self.beta0[i] = (b0[i] - gb) / d + sd * z;
        }
        Ok(())
    }

    fn update_hyper(&mut self) -> Result<()> {
        let prior = self.cov.prior().clone();
        self.sigma2_0 = draw_inv_gamma(
            prior.a_0 + 0.5 * self.beta0.len() as f64,
            prior.b_0 + 0.5 * self.beta0.norm_squared(),
            &mut self.rng,
        )?;
        self.sigma2_beta = draw_inv_gamma(
            prior.a_beta + 0.5 * self.beta.len() as f64,
            prior.b_beta + 0.5 * self.beta.norm_squared(),
            &mut self.rng,
        )?;
        Ok(())
    }
}

fn draw_inv_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0 / scale).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(1.0 / g.sample(rng))
}

impl Sampler for GlmSampler {
    fn sweep(&mut self) -> Result<()> {
        let burning = self.iteration < self.cov_config().burn_in;
        let c = self.cov.sigma_matrix();
        let chol = cholesky(&c)?;
        let l = chol.l();
        let xb = &self.data.covariates * &self.beta;
        self.update_theta(&l, &xb);
        let precision = chol.inverse();
        self.update_beta(&precision)?;
        self.update_hyper()?;

        let stats = self.residual_stats();
        self.cov.refresh(&stats)?;
        self.cov.update_variances(&stats, self.iteration, burning, &mut self.rng)?;
        self.cov.update_weights(&stats, self.iteration, burning, &mut self.rng)?;
        self.iteration += 1;
        if self.cov_config().keeps(self.iteration) {
            self.theta_sum += &self.theta;
            self.theta_count += 1;
        }
        Ok(())
    }

    fn iteration(&self) -> usize {
        self.iteration
    }

    fn state(&self) -> ModelState {
        let mut s = self.full_state();
        if !self.cov_config().store_theta {
            s.theta = None;
        }
        s
    }

    fn config(&self) -> &McmcConfig {
        self.cov_config()
    }

    fn graph(&self) -> &Arc<Graph> {
        self.cov.graph()
    }

    fn acceptance(&self) -> Acceptance {
        self.cov.acceptance()
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            kind: SamplerKind::Glm,
            iteration: self.iteration,
            state: self.full_state(),
            weight_scales: self.cov.weight_scales.clone(),
            variance_scale: self.cov.variance_scale.clone(),
            numerical_rejections: self.cov.numerical_rejections,
            rng: self.rng.clone(),
            theta_sum: Some(self.theta_sum.clone()),
            theta_count: self.theta_count,
        }
    }

    fn theta_mean(&self) -> Option<Matrix> {
        (self.theta_count > 0).then(|| &self.theta_sum / self.theta_count as f64)
    }
}

impl GlmSampler {
    fn cov_config(&self) -> &McmcConfig {
        self.cov.config()
    }

    fn full_state(&self) -> ModelState {
        ModelState {
            sigma2: self.cov.sigma2,
            psi: self.cov.psi,
            weights: self.cov.weights.clone(),
            beta0: self.beta0.iter().copied().collect(),
            beta: self.beta.iter().copied().collect(),
            sigma2_0: Some(self.sigma2_0),
            sigma2_beta: Some(self.sigma2_beta),
            theta: Some(self.theta.clone()),
        }
    }
}

pub fn fit_glm(data: &GlmData, graph: &Arc<Graph>, prior: &PriorSpec, config: &McmcConfig) -> Result<Chain> {
    let mut s = GlmSampler::new(data.clone(), Arc::clone(graph), prior.clone(), config.clone())?;
    run_chain(&mut s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::gaussian::run_sampler;

    fn small_data() -> (Arc<Graph>, GlmData) {
        let g = Arc::new(Graph::path(4).unwrap());
        let counts = Matrix::from_fn(6, 4, |i, j| ((i * 7 + j * 3) % 5) as f64);
        let x = Matrix::from_fn(4, 2, |j, k| (j as f64 - 1.5) * if k == 0 { 1.0 } else { -0.5 });
        let data = GlmData::new(counts, Matrix::from_element(6, 4, 2.0), x).unwrap();
        (g, data)
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad_counts = Matrix::from_element(2, 3, 1.5);
        assert!(GlmData::counts_only(bad_counts).is_err());
        let c = Matrix::from_element(2, 3, 1.0);
        assert!(GlmData::new(c.clone(), Matrix::from_element(2, 3, 0.0), Matrix::zeros(3, 0)).is_err());
        assert!(GlmData::new(c, Matrix::from_element(2, 3, 1.0), Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn runs_and_resumes_exactly() {
        let (g, data) = small_data();
        let config = McmcConfig { iterations: 40, burn_in: 10, seed: 5, estimate_nugget: true, ..McmcConfig::default() };
        let prior = PriorSpec::default();
        let full = fit_glm(&data, &g, &prior, &config).unwrap();
        assert_eq!(full.len(), 30);
        assert!(full.states.iter().all(|s| s.check_invariants() && s.beta.len() == 2 && s.beta0.len() == 6));

        let mut s = GlmSampler::new(data.clone(), Arc::clone(&g), prior.clone(), config.clone()).unwrap();
        let mut states = Vec::new();
        run_sampler(&mut s, 17, |_, st| {
            states.push(st.clone());
            Ok(())
        })
        .unwrap();
        let cp: Checkpoint = serde_json::from_str(&serde_json::to_string(&s.checkpoint()).unwrap()).unwrap();
        let mut r = GlmSampler::restore(data, g, prior, config, &cp).unwrap();
        run_sampler(&mut r, 40, |_, st| {
            states.push(st.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(states, full.states);
        assert_eq!(r.theta_mean(), full.theta_mean);
    }
}
