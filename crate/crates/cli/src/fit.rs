use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use graphcov::experiments::{edge_z_scores_from_values, variance_ratio};
use graphcov::inference::{
    assemble_chain, chain_ess, run_sampler, Checkpoint, GaussianSampler, GlmSampler, ParamSelector, Sampler,
};
use graphcov::io::{
    config_hash, read_edge_list, read_json, read_matrix_csv, read_trace, trace_columns, write_json, write_matrix_csv,
    EdgeList, TraceHeader, TraceWriter,
};
use graphcov::{rescale_range, Chain, GlmData, Graph, McmcConfig, ModelState, PriorSpec};
use serde::{Deserialize, Serialize};

use crate::output::{SamplerFailure, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Gaussian,
    Glm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub name: String,
    /// n×p observations (GLM: counts).
    pub data: PathBuf,
    #[serde(default)]
    pub effort: Option<PathBuf>,
    #[serde(default)]
    pub covariates: Option<PathBuf>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("fit-output")
}

fn default_checkpoint_every() -> usize {
    500
}

fn default_level() -> f64 {
    0.9
}

/// A fit run. Relative paths are resolved against the config file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub graph: PathBuf,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub model: ModelKind,
    pub datasets: Vec<Dataset>,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub mcmc: McmcConfig,
    /// Use the edge list's geographic distances in the weight prior.
    #[serde(default)]
    pub geo_prior: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    /// Credible-interval level for the summaries.
    #[serde(default = "default_level")]
    pub level: f64,
}

#[derive(Args)]
pub struct FitArgs {
    /// JSON run configuration.
    config: PathBuf,
    /// Continue from the checkpoints in the output directory.
    #[arg(long)]
    resume: bool,
    /// Stop after this many iterations, leaving a checkpoint to resume from.
    #[arg(long)]
    stop_after: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_config(args: &FitArgs) -> Result<FitConfig> {
    let mut cfg: FitConfig = read_json(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    cfg.graph = resolve(base, &cfg.graph);
    for d in &mut cfg.datasets {
        d.data = resolve(base, &d.data);
        d.effort = d.effort.as_deref().map(|p| resolve(base, p));
        d.covariates = d.covariates.as_deref().map(|p| resolve(base, p));
    }
    cfg.output_dir = match &args.output_dir {
        Some(dir) => dir.clone(),
        None => resolve(base, &cfg.output_dir),
    };
    if let Some(s) = args.seed {
        cfg.mcmc.seed = s;
    }
    if let Some(n) = args.iterations {
        cfg.mcmc.iterations = n;
    }
    if let Some(n) = args.burn_in {
        cfg.mcmc.burn_in = n;
    }
    // traces do not carry θ, so a resumed chain could not reproduce it
    cfg.mcmc.store_theta = false;
    cfg.mcmc.validate()?;
    if cfg.datasets.is_empty() {
        return Err(graphcov::Error::InvalidConfig("no datasets listed".into()).into());
    }
    if cfg.checkpoint_every == 0 {
        return Err(graphcov::Error::InvalidConfig("checkpoint_every must be positive".into()).into());
    }
    Ok(cfg)
}

/// Everything that determines the draws; output locations are left out so a
/// moved run still resumes.
#[derive(Serialize)]
struct HashedConfig<'a> {
    graph_hash: &'a str,
    model: ModelKind,
    prior: &'a PriorSpec,
    mcmc: &'a McmcConfig,
    dataset: &'a str,
}

struct DatasetRun<'a> {
    cfg: &'a FitConfig,
    graph: &'a Arc<Graph>,
    prior: &'a PriorSpec,
    mcmc: McmcConfig,
    dir: PathBuf,
    hash: String,
}

pub fn run(args: FitArgs) -> Result<()> {
    let cfg = load_config(&args)?;
    let EdgeList { graph, geo_dist } = read_edge_list(&cfg.graph, cfg.nodes)?;
    let mut prior = cfg.prior.clone();
    if cfg.geo_prior {
        match &geo_dist {
            Some(g) => prior.geo_dist = Some(g.clone()),
            None => bail!(graphcov::Error::InvalidConfig("geo_prior needs distances in the edge list".into())),
        }
    }
    prior.validate(&graph)?;
    let graph_hash = graph.content_hash();

    let mut ratio_rows = Vec::new();
    let mut complete = true;
    for (i, ds) in cfg.datasets.iter().enumerate() {
        let mcmc = McmcConfig { seed: cfg.mcmc.seed.wrapping_add(i as u64), ..cfg.mcmc.clone() };
        let hash = config_hash(&HashedConfig { graph_hash: &graph_hash, model: cfg.model, prior: &prior, mcmc: &mcmc, dataset: &ds.name })?;
        let run = DatasetRun { cfg: &cfg, graph: &graph, prior: &prior, mcmc, dir: cfg.output_dir.join(&ds.name), hash };
        let Some(chain) = run.execute(ds, &args)? else {
            complete = false;
            continue;
        };
        run.summarize(&chain, geo_dist.as_deref())?;
        let vr = variance_ratio(&chain)?;
        ratio_rows.push((ds.name.clone(), vr, run.mcmc.seed, run.hash.clone()));
    }
    if complete {
        let mut text = String::from("dataset,mean,lower,upper,draws,seed,config_hash\n");
        for (name, vr, seed, hash) in &ratio_rows {
            text.push_str(&format!("{name},{},{},{},{},{seed},{hash}\n", vr.mean, vr.lower, vr.upper, vr.draws));
        }
        graphcov::io::atomic_write(&cfg.output_dir.join("variance_ratio.csv"), text.as_bytes())?;
        print!("{text}");
    }
    Ok(())
}

impl DatasetRun<'_> {
    fn header(&self, n_beta0: usize, n_beta: usize) -> Result<TraceHeader> {
        Ok(TraceHeader {
            graph_hash: self.graph.content_hash(),
            seed: self.mcmc.seed,
            prior: serde_json::to_value(self.prior)?,
            config: serde_json::json!({ "mcmc": self.mcmc, "model": self.cfg.model, "config_hash": self.hash }),
            columns: trace_columns(self.graph, n_beta0, n_beta, self.cfg.model == ModelKind::Glm),
        })
    }

    /// Run or resume the chain. `None` when stopped early on request.
    fn execute(&self, ds: &Dataset, args: &FitArgs) -> Result<Option<Chain>> {
        let y = read_matrix_csv(&ds.data)?;
        let cp_path = self.dir.join("checkpoint.json");
        let checkpoint: Option<Checkpoint> = if args.resume && cp_path.exists() {
            Some(read_json(&cp_path)?)
        } else {
            None
        };
        let (g, p, m) = (Arc::clone(self.graph), self.prior.clone(), self.mcmc.clone());
        match self.cfg.model {
            ModelKind::Gaussian => {
                let s = match &checkpoint {
                    Some(cp) => GaussianSampler::restore(&y, g, p, m, cp)?,
                    None => GaussianSampler::new(&y, g, p, m)?,
                };
                self.drive(s, 0, 0, args)
            }
            ModelKind::Glm => {
                let effort = ds.effort.as_deref().map(read_matrix_csv).transpose()?;
                let cov = ds.covariates.as_deref().map(read_matrix_csv).transpose()?;
                let n = y.nrows();
                let effort = effort.unwrap_or_else(|| graphcov::linalg::Matrix::from_element(n, y.ncols(), 1.0));
                let cov = cov.unwrap_or_else(|| graphcov::linalg::Matrix::zeros(y.ncols(), 0));
                let q = cov.ncols();
                let data = GlmData::new(y, effort, cov)?;
                let s = match &checkpoint {
                    Some(cp) => GlmSampler::restore(data, g, p, m, cp)?,
                    None => GlmSampler::new(data, g, p, m)?,
                };
                self.drive(s, n, q, args)
            }
        }
    }

    fn drive<S: Sampler>(&self, mut sampler: S, n_beta0: usize, n_beta: usize, args: &FitArgs) -> Result<Option<Chain>> {
        let header = self.header(n_beta0, n_beta)?;
        let trace_path = self.dir.join("trace.csv");
        let cp_path = self.dir.join("checkpoint.json");
        let start = sampler.iteration();
        let mut rows: Vec<(usize, ModelState)> = Vec::new();
        let mut writer = if start > 0 {
            let (old, mut saved) = read_trace(&trace_path, self.graph.edge_count(), n_beta0, n_beta)
                .with_context(|| format!("reading {} to resume", trace_path.display()))?;
            if old.config != header.config || old.graph_hash != header.graph_hash {
                bail!(graphcov::Error::InvalidConfig(format!(
                    "{} was written by a different configuration; rerun without --resume",
                    trace_path.display()
                )));
            }
            saved.retain(|(t, _)| *t <= start);
            rows = saved;
            TraceWriter::rewrite(&trace_path, &header, &rows)?
        } else {
            TraceWriter::create(&trace_path, &header)?
        };

        let total = self.mcmc.iterations;
        let stop = args.stop_after.map_or(total, |s| s.min(total)).max(start);
        while sampler.iteration() < stop {
            let until = (sampler.iteration() + self.cfg.checkpoint_every).min(stop);
            let swept = run_sampler(&mut sampler, until, |t, s| {
                rows.push((t, s.clone()));
                writer.append(t, s)
            });
            writer.flush()?;
            if let Err(e) = swept {
                if e.is_parse() {
                    return Err(e.into());
                }
                self.dump_failure(&sampler, &e)?;
                return Err(SamplerFailure(format!("{} at iteration {}: {e}", self.dir.display(), sampler.iteration())).into());
            }
            write_json(&cp_path, &sampler.checkpoint())?;
        }
        if sampler.iteration() < total {
            eprintln!(
                "{}: stopped at iteration {} of {total}; rerun with --resume to continue",
                self.dir.display(),
                sampler.iteration()
            );
            return Ok(None);
        }
        let states = rows.into_iter().map(|(_, s)| s).collect();
        Ok(Some(assemble_chain(&sampler, states)?))
    }

    fn dump_failure<S: Sampler>(&self, sampler: &S, e: &graphcov::Error) -> Result<()> {
        let dump = serde_json::json!({
            "error": e.to_string(),
            "iteration": sampler.iteration(),
            "state": sampler.state(),
            "acceptance": sampler.acceptance(),
            "seed": self.mcmc.seed,
            "config_hash": self.hash,
        });
        write_json(&self.dir.join("failure.json"), &dump)?;
        Ok(())
    }

    fn summarize(&self, chain: &Chain, geo: Option<&[f64]>) -> Result<()> {
        let seed = self.mcmc.seed;
        let d = chain.posterior_mean_distance()?;
        write_matrix_csv(&self.dir.join("distance_mean.csv"), d.matrix())?;
        let rr = rescale_range(&d)?;
        write_matrix_csv(&self.dir.join("distance_scaled.csv"), rr.d_scaled.matrix())?;
        if let Some(theta) = &chain.theta_mean {
            write_matrix_csv(&self.dir.join("theta_mean.csv"), theta)?;
        }

        let selectors = chain.selectors();
        let mut params = Table::new(&["parameter", "mean", "lower", "upper"], seed, &self.hash);
        let mut ess = Table::new(&["parameter", "ess"], seed, &self.hash);
        for sel in &selectors {
            let name = sel.name(self.graph);
            let (lo, hi) = chain.credible_interval(*sel, self.cfg.level);
            params.row(&[name.clone(), chain.mean(*sel).to_string(), lo.to_string(), hi.to_string()]);
            let value = match chain_ess(chain, *sel) {
                Ok(v) => format!("{v:.1}"),
                Err(_) => "NA".to_string(),
            };
            ess.row(&[name, value]);
        }
        params.emit(Some(&self.dir.join("parameters.csv")))?;
        ess.emit(Some(&self.dir.join("ess.csv")))?;

        if let Some(geo) = geo {
            let fitted: Vec<f64> = self.graph.edges().iter().map(|&(j, k)| d.get(j, k)).collect();
            let scores = edge_z_scores_from_values(&fitted, geo, self.graph)?;
            let mut t = Table::new(&["j", "k", "z_d"], seed, &self.hash);
            for s in scores {
                t.row(&[s.edge.0.to_string(), s.edge.1.to_string(), s.z_d.to_string()]);
            }
            t.emit(Some(&self.dir.join("z_scores.csv")))?;
        }

        let weight_ess: Vec<f64> = selectors
            .iter()
            .filter(|s| matches!(s, ParamSelector::Weight(_)))
            .filter_map(|s| chain_ess(chain, *s).ok())
            .collect();
        let summary = serde_json::json!({
            "seed": seed,
            "config_hash": self.hash,
            "graph_hash": self.graph.content_hash(),
            "draws": chain.len(),
            "tau_s": rr.tau_s,
            "acceptance": chain.acceptance,
            "mean_weight_ess": weight_ess.iter().sum::<f64>() / weight_ess.len().max(1) as f64,
            "mcmc": self.mcmc,
            "prior": self.prior,
        });
        write_json(&self.dir.join("summary.json"), &summary)?;
        Ok(())
    }
}
