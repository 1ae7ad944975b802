use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use graphcov::io::{read_edge_list, read_weights, write_matrix_csv};
use graphcov::{build_sigma, certify_euclidean, delta_m, quasi_euclidean, resistance, shortest_path, MaternSpec};

#[derive(Clone, Copy, ValueEnum)]
pub enum Metric {
    Sp,
    Res,
    Qe,
    DeltaM,
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Edge list: `j k [d_geo]` per line.
    #[arg(long)]
    graph: PathBuf,
    /// Edge weights as `j k w` lines or a dense CSV matrix.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long, value_enum, default_value = "qe")]
    metric: Metric,
    /// Power of the Laplacian pseudoinverse for `delta-m`.
    #[arg(long)]
    m: Option<f64>,
    /// Distance matrix CSV.
    #[arg(long)]
    out: PathBuf,
    /// Also write the Matérn covariance of the distances.
    #[arg(long)]
    covariance_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.5)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
}

pub fn run(a: MetricsArgs) -> Result<()> {
    let el = read_edge_list(&a.graph, None)?;
    let w = read_weights(&a.weights, &el.graph)?;
    let d = match a.metric {
        Metric::Sp => shortest_path(&w),
        Metric::Res => resistance(&w)?,
        Metric::Qe => quasi_euclidean(&w)?,
        Metric::DeltaM => {
            let m = a.m.ok_or_else(|| graphcov::Error::InvalidConfig("--m is required for delta-m".into()))?;
            delta_m(&w, m)?
        }
    };
    write_matrix_csv(&a.out, d.matrix())?;
    let cert = certify_euclidean(&d);
    println!(
        "euclidean={} min_gram_eigenvalue={:.6e} max_gram_eigenvalue={:.6e} nodes={} out={}",
        cert.is_euclidean,
        cert.min_gram_eigenvalue,
        cert.max_gram_eigenvalue,
        d.size(),
        a.out.display()
    );
    if let Some(path) = a.covariance_out {
        let spec = MaternSpec::new(a.nu, a.sigma2)?;
        let sigma = build_sigma(&w, &spec, 0.0)?;
        write_matrix_csv(&path, sigma.matrix())?;
    }
    Ok(())
}
