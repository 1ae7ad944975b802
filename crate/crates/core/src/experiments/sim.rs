use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synthetic::{generate_synthetic, SyntheticKind};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::inference::{fit_gaussian, McmcConfig, ModelState, ParamSelector, PriorSpec};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSetting {
    /// Lattice side; the graph has `side²` nodes.
    pub side: usize,
    pub n: usize,
    pub sigma2: f64,
    pub psi: f64,
}

impl SimSetting {
    /// The full 3 × 3 × 2 grid.
    pub fn grid() -> Vec<SimSetting> {
        let mut out = Vec::new();
        for (sigma2, psi) in [(0.2, 0.8), (0.8, 0.2)] {
            for side in [5, 10, 15] {
                for n in [10, 25, 50] {
                    out.push(SimSetting { side, n, sigma2, psi });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimStudyConfig {
    pub replications: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
    pub prior: PriorSpec,
    /// Generating distribution of each edge weight, `Gamma(shape, rate)`.
    pub weight_shape: f64,
    pub weight_rate: f64,
    pub level: f64,
}

impl Default for SimStudyConfig {
    fn default() -> Self {
        Self {
            replications: 10,
            seed: 0,
            mcmc: McmcConfig { estimate_nugget: true, ..McmcConfig::default() },
            prior: PriorSpec {
                a_w: 3.0,
                b_w: 3.0,
                a_sigma2: 2.0,
                b_sigma2: 2.0,
                a_psi: 2.0,
                b_psi: 2.0,
                ..PriorSpec::default()
            },
            weight_shape: 3.0,
            weight_rate: 3.0,
            level: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStudyResult {
    pub setting: SimSetting,
    /// Fraction of credible intervals covering the true weight, over all
    /// edges and replications.
    pub coverage: f64,
    /// Mean of posterior mean minus truth.
    pub bias: f64,
    pub rmse: f64,
    pub replications: usize,
}

#[derive(Debug, Clone)]
struct ReplicateOutcome {
    covered: usize,
    errors: Vec<f64>,
}

fn replicate(setting: SimSetting, setting_index: usize, rep: usize, config: &SimStudyConfig) -> Result<ReplicateOutcome> {
    let graph = Arc::new(Graph::lattice(setting.side)?);
    let mut rng = stream_rng(config.seed, ((setting_index as u64) << 32) | rep as u64);
    let gamma = Gamma::new(config.weight_shape, 1.0 / config.weight_rate).map_err(|e| Error::Domain(e.to_string()))?;
    let truth: Vec<f64> = (0..graph.edge_count()).map(|_| gamma.sample(&mut rng)).collect();
    let state = ModelState {
        sigma2: setting.sigma2,
        psi: setting.psi,
        weights: truth.clone(),
        beta0: Vec::new(),
        beta: Vec::new(),
        sigma2_0: None,
        sigma2_beta: None,
        theta: None,
    };
    let data = generate_synthetic(&graph, &state, config.mcmc.nu, setting.n, &SyntheticKind::Gaussian, &mut rng)?;
    let mcmc = McmcConfig { seed: rng.random(), ..config.mcmc.clone() };
    let chain = fit_gaussian(&data.y, &graph, &config.prior, &mcmc)?;
    let mut covered = 0;
    let mut errors = Vec::with_capacity(truth.len());
    for (e, &w) in truth.iter().enumerate() {
        let sel = ParamSelector::Weight(e);
        let (lo, hi) = chain.credible_interval(sel, config.level);
        covered += (lo <= w && w <= hi) as usize;
        errors.push(chain.mean(sel) - w);
    }
    Ok(ReplicateOutcome { covered, errors })
}

/// Simulate-and-refit study on lattices. Every replication draws from its
/// own random stream, so results do not depend on thread scheduling.
pub fn run_sim_study(settings: &[SimSetting], config: &SimStudyConfig) -> Result<Vec<SimStudyResult>> {
    if config.replications == 0 {
        return Err(Error::InvalidConfig("at least one replication is required".into()));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::InvalidConfig("credible level must lie in (0, 1)".into()));
    }
    config.mcmc.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..settings.len()).flat_map(|s| (0..config.replications).map(move |r| (s, r))).collect();
    let outcomes: Vec<Result<ReplicateOutcome>> =
        jobs.par_iter().map(|&(s, r)| replicate(settings[s], s, r, config)).collect();
    let mut results = Vec::with_capacity(settings.len());
    let mut it = outcomes.into_iter();
    for &setting in settings {
        let mut covered = 0;
        let mut errors = Vec::new();
        for _ in 0..config.replications {
            let o = it.next().expect("one outcome per job")?;
            covered += o.covered;
            errors.extend(o.errors);
        }
        let m = errors.len() as f64;
        results.push(SimStudyResult {
            setting,
            coverage: covered as f64 / m,
            bias: errors.iter().sum::<f64>() / m,
            rmse: (errors.iter().map(|e| e * e).sum::<f64>() / m).sqrt(),
            replications: config.replications,
        });
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_replications_is_an_error() {
        let config = SimStudyConfig { replications: 0, ..SimStudyConfig::default() };
        assert!(run_sim_study(&[SimSetting { side: 3, n: 5, sigma2: 0.8, psi: 0.2 }], &config).is_err());
    }

    #[test]
    fn grid_has_eighteen_settings() {
        assert_eq!(SimSetting::grid().len(), 18);
    }

    #[test]
    fn small_study_is_deterministic() {
        let config = SimStudyConfig {
            replications: 2,
            seed: 8,
            mcmc: McmcConfig { iterations: 200, burn_in: 100, estimate_nugget: true, ..McmcConfig::default() },
            ..SimStudyConfig::default()
        };
        let settings = [SimSetting { side: 3, n: 10, sigma2: 0.8, psi: 0.2 }];
        let a = run_sim_study(&settings, &config).unwrap();
        let b = run_sim_study(&settings, &config).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a[0].coverage));
        assert!(a[0].rmse >= a[0].bias.abs());
    }
}
