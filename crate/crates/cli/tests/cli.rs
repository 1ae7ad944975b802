use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graphcov"))
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/five_node")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn missing_file_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["metrics", "--graph", "/no/such/graph.txt", "--weights", "/no/such/w.txt", "--out", p(&dir.path().join("d.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/graph.txt"));
}

#[test]
fn disconnected_graph_exits_with_graph_code() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let w = dir.path().join("w.txt");
    fs::write(&g, "0 1\n2 3\n").unwrap();
    fs::write(&w, "0 1 1\n2 3 1\n").unwrap();
    let o = run(&["metrics", "--graph", p(&g), "--weights", p(&w), "--out", p(&dir.path().join("d.csv"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn shortest_path_on_four_cycle_is_not_euclidean() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("cycle.txt");
    let w = dir.path().join("w.txt");
    fs::write(&g, "0 1\n1 2\n2 3\n3 0\n").unwrap();
    fs::write(&w, "0 1 1\n1 2 1\n2 3 1\n0 3 1\n").unwrap();
    let out = dir.path().join("d.csv");
    let sp = run(&["metrics", "--graph", p(&g), "--weights", p(&w), "--metric", "sp", "--out", p(&out)]);
    assert!(sp.status.success());
    assert!(stdout(&sp).contains("euclidean=false"), "{}", stdout(&sp));
    let d = fs::read_to_string(&out).unwrap();
    assert_eq!(d.lines().count(), 4);
    assert!(d.lines().next().unwrap().split(',').nth(2).unwrap().starts_with("2.0000000000000000e0"));

    let qe = run(&["metrics", "--graph", p(&g), "--weights", p(&w), "--metric", "qe", "--out", p(&out)]);
    assert!(stdout(&qe).contains("euclidean=true"));
    let dm = run(&["metrics", "--graph", p(&g), "--weights", p(&w), "--metric", "delta-m", "--out", p(&out)]);
    assert_eq!(dm.status.code(), Some(3), "delta-m without --m");
}

#[test]
fn metrics_covariance_matches_reference_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("s.csv");
    let d = data_dir();
    let o = run(&[
        "metrics",
        "--graph",
        p(&d.join("graph.txt")),
        "--weights",
        p(&d.join("weights_c.txt")),
        "--out",
        p(&dir.path().join("d.csv")),
        "--covariance-out",
        p(&sigma),
        "--nu",
        "2.5",
    ]);
    assert!(o.status.success());
    let got = graphcov::io::read_matrix_csv(&sigma).unwrap();
    let printed = graphcov::experiments::fixtures::five_node_printed('c').unwrap();
    let worst = (&got - &printed).abs().max();
    assert!(worst < 0.005, "max deviation {worst}");
}

fn fit_args<'a>(config: &'a str, out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["fit", config, "--output-dir", out, "--iterations", "1200", "--burn-in", "200"];
    v.extend_from_slice(extra);
    v
}

#[test]
fn fit_smoke_writes_all_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data_dir().join("fit.json");
    let o = run(&fit_args(p(&cfg), p(dir.path()), &[]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run_dir = dir.path().join("config_c");
    for f in ["trace.csv", "checkpoint.json", "distance_mean.csv", "ess.csv", "parameters.csv", "summary.json", "z_scores.csv"] {
        assert!(run_dir.join(f).exists(), "missing {f}");
    }
    let ess = fs::read_to_string(run_dir.join("ess.csv")).unwrap();
    assert_eq!(ess.lines().count(), 1 + 1 + 8);
    for line in ess.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2], "7", "seed column");
        assert_eq!(cols[3].len(), 16, "config hash column");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(run_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["draws"], 1000);
    assert!(summary["tau_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn resumed_fit_matches_uninterrupted_run() {
    let full = tempfile::tempdir().unwrap();
    let split = tempfile::tempdir().unwrap();
    let cfg = data_dir().join("fit.json");
    assert!(run(&fit_args(p(&cfg), p(full.path()), &[])).status.success());

    let first = run(&fit_args(p(&cfg), p(split.path()), &["--stop-after", "333"]));
    assert!(first.status.success());
    assert!(!split.path().join("variance_ratio.csv").exists());
    // a torn final line from a crash must be discarded on resume
    let trace = split.path().join("config_c/trace.csv");
    let mut text = fs::read_to_string(&trace).unwrap();
    text.push_str("400,0.5,0.1");
    fs::write(&trace, text).unwrap();
    let second = run(&fit_args(p(&cfg), p(split.path()), &["--resume"]));
    assert!(second.status.success(), "{}", String::from_utf8_lossy(&second.stderr));

    for f in ["config_c/trace.csv", "config_c/parameters.csv", "config_c/distance_mean.csv", "variance_ratio.csv"] {
        assert_eq!(fs::read(full.path().join(f)).unwrap(), fs::read(split.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn resume_rejects_changed_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data_dir().join("fit.json");
    assert!(run(&fit_args(p(&cfg), p(dir.path()), &["--stop-after", "100"])).status.success());
    let o = run(&fit_args(p(&cfg), p(dir.path()), &["--resume", "--seed", "99"]));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_config_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{ \"graph\": ").unwrap();
    assert_eq!(run(&["fit", p(&cfg)]).status.code(), Some(2));
}

#[test]
fn glm_fit_reports_one_ratio_row_per_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data_dir().join("fit_glm.json");
    let o = run(&fit_args(p(&cfg), p(dir.path()), &[]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("variance_ratio.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("counts_a,") && rows[1].starts_with("counts_b,"));
    for r in rows {
        let mean: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&mean));
    }
    assert!(dir.path().join("counts_a/theta_mean.csv").exists());
}

#[test]
fn kl_table_builtin_orders_model_classes() {
    let o = run(&["kl-table", "--targets", "builtin", "--samples", "100000", "--seed", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 6);
    let kl = |model: &str, target: &str| -> f64 {
        rows.iter().find(|r| r[0] == model && r[1] == target).unwrap()[2].parse().unwrap()
    };
    for t in ["sigma1", "sigma2"] {
        assert!(kl("quasi-euclidean", t) < kl("carw", t));
        assert!(kl("carw", t) < kl("car1", t));
    }
    assert!(rows.iter().all(|r| r[6] == "1"));
}

#[test]
fn simulate_and_hetero_test_on_exchangeable_data() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("cycle.txt");
    fs::write(&g, "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n").unwrap();
    let mut accepted = 0;
    for seed in 0..40 {
        let y = dir.path().join(format!("y{seed}.csv"));
        let s = run(&["simulate", "--graph", p(&g), "--n", "200", "--seed", &seed.to_string(), "--out", p(&y)]);
        assert!(s.status.success());
        assert!(y.with_extension("json").exists());
        let o = run(&["hetero-test", "--graph", p(&g), "--data", p(&y)]);
        assert!(o.status.success());
        let line = stdout(&o).lines().last().unwrap().to_string();
        let pv: f64 = line.rsplit("p_value=").next().unwrap().parse().unwrap();
        if pv > 0.05 {
            accepted += 1;
        }
    }
    assert!(accepted >= 33, "{accepted}/40");
}

#[test]
fn zscore_from_fitted_distances() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    let data = data_dir();
    assert!(run(&["metrics", "--graph", p(&data.join("graph.txt")), "--weights", p(&data.join("weights_c.txt")), "--out", p(&d)])
        .status
        .success());
    let o = run(&["zscore", "--graph", p(&data.join("graph.txt")), "--distance", p(&d)]);
    assert!(o.status.success());
    let z: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(z.len(), 8);
    assert!(z.iter().sum::<f64>().abs() < 1e-9);
}

#[test]
fn sim_study_small_has_table_shape() {
    let o = run(&["sim-study", "--settings", "small", "--replications", "1", "--iterations", "150", "--burn-in", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    for line in text.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        assert_eq!(c[0], "25");
        let cov: f64 = c[4].parse().unwrap();
        assert!((0.0..=1.0).contains(&cov));
    }
}
