use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Result;
use clap::{Args, ValueEnum};
use graphcov::experiments::fixtures::{five_node_graph, kl_target_1, kl_target_2, KL_REFERENCE, SIM_REFERENCE};
use graphcov::experiments::{
    closest_in_class, correlation_heterogeneity_test, edge_z_scores_from_values, generate_synthetic, run_sim_study,
    KlConfig, ModelClass, SimSetting, SimStudyConfig, SyntheticKind,
};
use graphcov::io::{
    config_hash, read_edge_list, read_matrix_csv, read_weights, write_json, write_matrix_csv,
};
use graphcov::rng::stream_rng;
use graphcov::{CovarianceMatrix, EdgeWeights, Error, ModelState};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::Table;

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimModel {
    Gaussian,
    Poisson,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Edge weights; all ones when omitted.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gaussian")]
    model: SimModel,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 0.0)]
    psi: f64,
    #[arg(long, default_value_t = 1.5)]
    nu: f64,
    /// Row intercept for Poisson data.
    #[arg(long, default_value_t = 0.0)]
    beta0: f64,
    /// Covariate coefficients, comma separated.
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    /// n×p effort matrix for Poisson data.
    #[arg(long)]
    effort: Option<PathBuf>,
    /// p×q covariate matrix for Poisson data.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let el = read_edge_list(&a.graph, None)?;
    let graph = el.graph;
    let w = match &a.weights {
        Some(p) => read_weights(p, &graph)?,
        None => EdgeWeights::uniform(&graph, 1.0)?,
    };
    let kind = match a.model {
        SimModel::Gaussian => SyntheticKind::Gaussian,
        SimModel::Poisson => SyntheticKind::PoissonGlm {
            effort: a.effort.as_deref().map(read_matrix_csv).transpose()?,
            covariates: a.covariates.as_deref().map(read_matrix_csv).transpose()?,
        },
    };
    let params = ModelState {
        sigma2: a.sigma2,
        psi: a.psi,
        weights: w.values().to_vec(),
        beta0: vec![a.beta0; a.n],
        beta: a.beta.clone(),
        sigma2_0: None,
        sigma2_beta: None,
        theta: None,
    };
    let mut rng = stream_rng(a.seed, 0);
    let data = generate_synthetic(&graph, &params, a.nu, a.n, &kind, &mut rng)?;
    write_matrix_csv(&a.out, &data.y)?;
    if let Some(theta) = &data.theta {
        write_matrix_csv(&sibling(&a.out, "theta"), theta)?;
    }
    let sidecar = serde_json::json!({
        "seed": a.seed,
        "config_hash": config_hash(&a)?,
        "graph_hash": graph.content_hash(),
        "arguments": a,
        "weights": w.values(),
    });
    write_json(&a.out.with_extension("json"), &sidecar)?;
    Ok(())
}

/// `dir/stem.tag.ext` next to `path`.
fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|s| format!(".{}", s.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}{ext}"))
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Targets {
    /// The two five-node reference targets.
    Builtin,
    /// Targets given by `--target` files on `--graph`.
    Files,
}

#[derive(Args)]
pub struct KlTableArgs {
    #[arg(long, value_enum, default_value = "builtin")]
    targets: Targets,
    /// Target covariance CSVs (with `--targets files`).
    #[arg(long = "target")]
    target_files: Vec<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Rows simulated from each target.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.5)]
    nu: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn kl_table(a: KlTableArgs) -> Result<()> {
    let (graph, targets, builtin) = match a.targets {
        Targets::Builtin => (five_node_graph(), vec![kl_target_1(), kl_target_2()], true),
        Targets::Files => {
            let g = a.graph.as_deref().ok_or_else(|| Error::InvalidConfig("--graph is required with --targets files".into()))?;
            let targets = a.target_files.iter().map(|p| read_matrix_csv(p)).collect::<graphcov::Result<Vec<_>>>()?;
            if targets.is_empty() {
                return Err(Error::InvalidConfig("no --target files given".into()).into());
            }
            (read_edge_list(g, None)?.graph, targets, false)
        }
    };
    let mut config = KlConfig { samples: a.samples, ..KlConfig::default() };
    config.mcmc.seed = a.seed;
    let hash = config_hash(&(&config, a.nu))?;
    let classes = [ModelClass::QuasiEuclidean { nu: a.nu }, ModelClass::Car1, ModelClass::Carw];
    let jobs: Vec<(usize, usize)> = (0..classes.len()).flat_map(|c| (0..targets.len()).map(move |t| (c, t))).collect();
    let results = jobs
        .par_iter()
        .map(|&(c, t)| {
            let target = CovarianceMatrix::external(targets[t].clone())?;
            closest_in_class(&target, classes[c], &graph, &config)
        })
        .collect::<graphcov::Result<Vec<_>>>()?;

    let mut table = Table::new(&["model", "target", "kl", "kl_target_to_fit", "reference", "mc_samples"], a.seed, &hash);
    for (&(c, t), r) in jobs.iter().zip(&results) {
        let reference = match (builtin, t) {
            (true, 0) => KL_REFERENCE[c].1.to_string(),
            (true, 1) => KL_REFERENCE[c].2.to_string(),
            _ => String::new(),
        };
        table.row(&[
            r.model_name.clone(),
            format!("sigma{}", t + 1),
            format!("{:.4}", r.kl),
            format!("{:.4}", r.kl_target_to_fit),
            reference,
            r.mc_samples.to_string(),
        ]);
    }
    table.emit(a.out.as_deref())?;
    if a.out.is_some() {
        print!("{}", table.as_str());
    }
    Ok(())
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SettingsSize {
    /// The 5×5 lattice rows.
    Small,
    /// All eighteen settings.
    Full,
}

#[derive(Args)]
pub struct SimStudyArgs {
    #[arg(long, value_enum, default_value = "small")]
    settings: SettingsSize,
    #[arg(long, default_value_t = 10)]
    replications: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn sim_study(a: SimStudyArgs) -> Result<()> {
    let mut config = SimStudyConfig { replications: a.replications, seed: a.seed, ..SimStudyConfig::default() };
    if let Some(n) = a.iterations {
        config.mcmc.iterations = n;
    }
    if let Some(n) = a.burn_in {
        config.mcmc.burn_in = n;
    }
    config.mcmc.validate()?;
    let settings: Vec<SimSetting> = match a.settings {
        SettingsSize::Small => SimSetting::grid().into_iter().filter(|s| s.side == 5).collect(),
        SettingsSize::Full => SimSetting::grid(),
    };
    let hash = config_hash(&(&config, &settings))?;
    let results = run_sim_study(&settings, &config)?;
    let mut table = Table::new(
        &["p", "n", "sigma2", "psi", "coverage", "bias", "rmse", "replications", "ref_coverage", "ref_bias", "ref_rmse"],
        a.seed,
        &hash,
    );
    for r in &results {
        let s = r.setting;
        let reference = SIM_REFERENCE.iter().find(|x| x.0 == s.side && x.1 == s.n && x.2 == s.sigma2);
        let refs = reference.map_or([String::new(), String::new(), String::new()], |x| {
            [x.3.to_string(), x.4.to_string(), x.5.to_string()]
        });
        table.row(&[
            (s.side * s.side).to_string(),
            s.n.to_string(),
            s.sigma2.to_string(),
            s.psi.to_string(),
            format!("{:.3}", r.coverage),
            format!("{:.3}", r.bias),
            format!("{:.3}", r.rmse),
            r.replications.to_string(),
            refs[0].clone(),
            refs[1].clone(),
            refs[2].clone(),
        ]);
    }
    table.emit(a.out.as_deref())?;
    if a.out.is_some() {
        print!("{}", table.as_str());
    }
    Ok(())
}

#[derive(Args)]
pub struct HeteroArgs {
    #[arg(long)]
    graph: PathBuf,
    /// n×p observations.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn hetero_test(a: HeteroArgs) -> Result<()> {
    let graph = read_edge_list(&a.graph, None)?.graph;
    let y = read_matrix_csv(&a.data)?;
    let t = correlation_heterogeneity_test(&y, &graph)?;
    let hash = config_hash(&serde_json::json!({ "graph": graph.content_hash(), "data": a.data }))?;
    let mut table = Table::new(&["j", "k", "r", "fisher_z"], 0, &hash);
    for ((e, r), z) in t.edges.iter().zip(&t.pair_correlations).zip(&t.fisher_z) {
        table.row(&[e.0.to_string(), e.1.to_string(), r.to_string(), z.to_string()]);
    }
    table.emit(a.out.as_deref())?;
    println!("statistic={} df={} f_stat={} p_value={}", t.statistic, t.df, t.f_stat, t.p_value);
    if let Some(out) = &a.out {
        write_json(&out.with_extension("json"), &t)?;
    }
    Ok(())
}

#[derive(Args)]
pub struct ZscoreArgs {
    /// Edge list with geographic distances in the third column.
    #[arg(long)]
    graph: PathBuf,
    /// Posterior-mean distance matrix CSV, as written by `fit`.
    #[arg(long)]
    distance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn zscore(a: ZscoreArgs) -> Result<()> {
    let el = read_edge_list(&a.graph, None)?;
    let geo = el
        .geo_dist
        .ok_or_else(|| Error::InvalidConfig(format!("{} has no geographic distances", a.graph.display())))?;
    let graph: Arc<graphcov::Graph> = el.graph;
    let d = read_matrix_csv(&a.distance)?;
    let p = graph.node_count();
    if d.nrows() != p || d.ncols() != p {
        return Err(Error::DimensionMismatch(format!("distance matrix is {}×{}, graph has {p} nodes", d.nrows(), d.ncols())).into());
    }
    let fitted: Vec<f64> = graph.edges().iter().map(|&(j, k)| d[(j, k)]).collect();
    let scores = edge_z_scores_from_values(&fitted, &geo, &graph)?;
    let hash = config_hash(&serde_json::json!({ "graph": graph.content_hash(), "distance": a.distance }))?;
    let mut table = Table::new(&["j", "k", "z_d"], 0, &hash);
    for s in scores {
        table.row(&[s.edge.0.to_string(), s.edge.1.to_string(), s.z_d.to_string()]);
    }
    table.emit(a.out.as_deref())?;
    Ok(())
}

