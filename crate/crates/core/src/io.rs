//! File formats: matrix CSV, edge lists, weight files, JSON sidecars and
//! chain traces. Every writer goes through a temporary file and a rename.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};
use crate::inference::ModelState;
use crate::linalg::Matrix;

fn parse_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{}:{line}: {msg}", path.display()))
}

/// Write `bytes` to `path` atomically.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::InvalidConfig(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Row-major CSV, no header, 17 significant digits.
pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str, origin: &Path) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(origin, i + 1, e))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| parse_err(origin, i + 1, format!("not a number: {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(origin, i + 1, format!("expected {} columns, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: empty matrix", origin.display())));
    }
    let (n, p) = (rows.len(), rows[0].len());
    Ok(Matrix::from_fn(n, p, |i, j| rows[i][j]))
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    atomic_write(path, matrix_to_csv(m).as_bytes())
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    matrix_from_csv(&text, path)
}

/// A graph read from an edge list, with optional per-edge geographic
/// distances in the order of [`Graph::edges`].
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub graph: Arc<Graph>,
    pub geo_dist: Option<Vec<f64>>,
}

/// `j k [d_geo]` per line, 0-indexed, `#` comments. The node count is one
/// more than the largest index unless `nodes` is given.
pub fn parse_edge_list(text: &str, origin: &Path, nodes: Option<usize>) -> Result<EdgeList> {
    let mut pairs = Vec::new();
    let mut geo = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(origin, i + 1, "expected `j k` or `j k d_geo`"));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| parse_err(origin, i + 1, format!("bad node index {s:?}")));
        pairs.push((idx(fields[0])?, idx(fields[1])?));
        if let Some(d) = fields.get(2) {
            geo.push(d.parse::<f64>().map_err(|_| parse_err(origin, i + 1, format!("bad distance {d:?}")))?);
        }
    }
    if pairs.is_empty() {
        return Err(Error::Parse(format!("{}: no edges", origin.display())));
    }
    if !geo.is_empty() && geo.len() != pairs.len() {
        return Err(Error::Parse(format!("{}: geographic distance missing on some lines", origin.display())));
    }
    let p = nodes.unwrap_or_else(|| pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0) + 1);
    let graph = Arc::new(Graph::new(p, &pairs)?);
    let geo_dist = (!geo.is_empty()).then(|| {
        let mut out = vec![0.0; graph.edge_count()];
        for (&(a, b), d) in pairs.iter().zip(&geo) {
            out[graph.edge_index(a, b).expect("edge just inserted")] = *d;
        }
        out
    });
    Ok(EdgeList { graph, geo_dist })
}

pub fn read_edge_list(path: &Path, nodes: Option<usize>) -> Result<EdgeList> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_edge_list(&text, path, nodes)
}

/// Weights either as `j k w` lines covering every edge, or as a dense p×p
/// CSV matrix.
pub fn parse_weights(text: &str, origin: &Path, graph: &Arc<Graph>) -> Result<EdgeWeights> {
    let first = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty());
    let p = graph.node_count();
    let dense = first.is_some_and(|l| l.split(',').count() == p && p != 3);
    if dense {
        return EdgeWeights::from_matrix(graph, &matrix_from_csv(text, origin)?);
    }
    let mut values = vec![f64::NAN; graph.edge_count()];
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if f.len() != 3 {
            return Err(parse_err(origin, i + 1, "expected `j k w`"));
        }
        let j: usize = f[0].parse().map_err(|_| parse_err(origin, i + 1, "bad node index"))?;
        let k: usize = f[1].parse().map_err(|_| parse_err(origin, i + 1, "bad node index"))?;
        let w: f64 = f[2].parse().map_err(|_| parse_err(origin, i + 1, "bad weight"))?;
        let e = graph
            .edge_index(j, k)
            .ok_or_else(|| Error::InvalidWeights(format!("({j}, {k}) is not an edge of the graph")))?;
        values[e] = w;
    }
    if let Some(e) = values.iter().position(|v| v.is_nan()) {
        let (j, k) = graph.edges()[e];
        return Err(Error::InvalidWeights(format!("no weight given for edge ({j}, {k})")));
    }
    EdgeWeights::from_edge_values(graph, values)
}

pub fn read_weights(path: &Path, graph: &Arc<Graph>) -> Result<EdgeWeights> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_weights(&text, path, graph)
}

pub fn weights_to_text(w: &EdgeWeights) -> String {
    let mut out = String::new();
    for (&(j, k), v) in w.graph().edges().iter().zip(w.values()) {
        out.push_str(&format!("{j} {k} {v}\n"));
    }
    out
}

/// Short SHA-256 digest of the compact JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(&Sha256::digest(&bytes)[..8]))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Metadata stored as the first line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub graph_hash: String,
    pub seed: u64,
    pub prior: serde_json::Value,
    pub config: serde_json::Value,
    pub columns: Vec<String>,
}

/// Column names for a state layout.
pub fn trace_columns(graph: &Graph, n_beta0: usize, n_beta: usize, hyper: bool) -> Vec<String> {
    let mut cols = vec!["iteration".to_string(), "sigma2".into(), "psi".into()];
    cols.extend(graph.edges().iter().map(|(j, k)| format!("w_{j}_{k}")));
    cols.extend((0..n_beta0).map(|i| format!("beta0_{i}")));
    cols.extend((0..n_beta).map(|k| format!("beta_{k}")));
    if hyper {
        cols.push("sigma2_0".into());
        cols.push("sigma2_beta".into());
    }
    cols
}

fn state_row(iteration: usize, s: &ModelState) -> String {
    let mut f = vec![iteration.to_string(), s.sigma2.to_string(), s.psi.to_string()];
    f.extend(s.weights.iter().map(|v| v.to_string()));
    f.extend(s.beta0.iter().map(|v| v.to_string()));
    f.extend(s.beta.iter().map(|v| v.to_string()));
    if let (Some(a), Some(b)) = (s.sigma2_0, s.sigma2_beta) {
        f.push(a.to_string());
        f.push(b.to_string());
    }
    f.join(",")
}

/// Append-only CSV trace. Values are written in shortest round-trip form so
/// a resumed chain can be reassembled exactly.
pub struct TraceWriter {
    path: PathBuf,
    file: fs::File,
}

impl TraceWriter {
    pub fn create(path: &Path, header: &TraceHeader) -> Result<Self> {
        let mut text = format!("# {}\n", serde_json::to_string(header)?);
        text.push_str(&header.columns.join(","));
        text.push('\n');
        atomic_write(path, text.as_bytes())?;
        let file = fs::OpenOptions::new().append(true).open(path)?;
        Ok(Self { path: path.to_path_buf(), file })
    }

    /// Rewrite the trace with the given rows and continue appending.
    pub fn rewrite(path: &Path, header: &TraceHeader, rows: &[(usize, ModelState)]) -> Result<Self> {
        let mut text = format!("# {}\n{}\n", serde_json::to_string(header)?, header.columns.join(","));
        for (t, s) in rows {
            text.push_str(&state_row(*t, s));
            text.push('\n');
        }
        atomic_write(path, text.as_bytes())?;
        let file = fs::OpenOptions::new().append(true).open(path)?;
        Ok(Self { path: path.to_path_buf(), file })
    }

    pub fn append(&mut self, iteration: usize, s: &ModelState) -> Result<()> {
        writeln!(self.file, "{}", state_row(iteration, s))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.file.flush()?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Read a trace back into states. `n_edges`, `n_beta0` and `n_beta` give the
/// layout; the hyper-variance columns are detected from the header.
pub fn read_trace(path: &Path, n_edges: usize, n_beta0: usize, n_beta: usize) -> Result<(TraceHeader, Vec<(usize, ModelState)>)> {
    let f = fs::File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut lines = BufReader::new(f).lines();
    let first = lines.next().ok_or_else(|| Error::Parse(format!("{}: empty trace", path.display())))??;
    let json = first.strip_prefix("# ").ok_or_else(|| parse_err(path, 1, "missing JSON header"))?;
    let header: TraceHeader = serde_json::from_str(json).map_err(|e| parse_err(path, 1, e))?;
    lines.next().transpose()?;
    let hyper = header.columns.iter().any(|c| c == "sigma2_0");
    let width = 3 + n_edges + n_beta0 + n_beta + if hyper { 2 } else { 0 };
    if header.columns.len() != width {
        return Err(parse_err(path, 2, format!("expected {width} columns, header has {}", header.columns.len())));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<&str> = line.split(',').collect();
        if v.len() != width {
            // a partially written final line from an interrupted run
            break;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(path, i + 3, format!("bad value {s:?}")));
        let t: usize = v[0].parse().map_err(|_| parse_err(path, i + 3, "bad iteration"))?;
        let mut at = 3;
        let mut take = |k: usize| -> Result<Vec<f64>> {
            let out = v[at..at + k].iter().map(|s| num(s)).collect();
            at += k;
            out
        };
        let weights = take(n_edges)?;
        let beta0 = take(n_beta0)?;
        let beta = take(n_beta)?;
        let hv = if hyper { take(2)? } else { Vec::new() };
        rows.push((
            t,
            ModelState {
                sigma2: num(v[1])?,
                psi: num(v[2])?,
                weights,
                beta0,
                beta,
                sigma2_0: hv.first().copied(),
                sigma2_beta: hv.get(1).copied(),
                theta: None,
            },
        ));
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_csv_round_trip() {
        let m = Matrix::from_fn(4, 3, |i, j| ((i * 3 + j) as f64 * 1.37).sin() / 7.0 * 10f64.powi(i as i32 - 2));
        let back = matrix_from_csv(&matrix_to_csv(&m), Path::new("m.csv")).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn ragged_csv_is_a_parse_error() {
        let r = matrix_from_csv("1,2\n3\n", Path::new("x.csv"));
        assert!(r.unwrap_err().is_parse());
    }

    #[test]
    fn edge_list_with_geography() {
        let text = "# five nodes\n0 1 2.5\n1 2 1.0\n2 3 4.0  # trailing comment\n3 4 1.5\n0 4 3.0\n";
        let el = parse_edge_list(text, Path::new("g.txt"), None).unwrap();
        assert_eq!(el.graph.node_count(), 5);
        let geo = el.geo_dist.unwrap();
        assert_eq!(geo[el.graph.edge_index(0, 4).unwrap()], 3.0);
        assert_eq!(geo[el.graph.edge_index(2, 3).unwrap()], 4.0);
    }

    #[test]
    fn edge_list_errors() {
        assert!(parse_edge_list("0 x\n", Path::new("g"), None).unwrap_err().is_parse());
        assert!(matches!(
            parse_edge_list("0 1\n2 3\n", Path::new("g"), None),
            Err(Error::DisconnectedGraph { .. })
        ));
    }

    #[test]
    fn weights_both_formats() {
        let g = Arc::new(Graph::cycle(4).unwrap());
        let w = EdgeWeights::from_edge_values(&g, vec![0.5, 1.5, 2.0, 0.25]).unwrap();
        let a = parse_weights(&weights_to_text(&w), Path::new("w"), &g).unwrap();
        assert_eq!(a.values(), w.values());
        let b = parse_weights(&matrix_to_csv(w.matrix()), Path::new("w"), &g).unwrap();
        assert_eq!(b.values(), w.values());
        assert!(parse_weights("0 1 1.0\n", Path::new("w"), &g).is_err());
    }

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let g = Graph::path(3).unwrap();
        let header = TraceHeader {
            graph_hash: g.content_hash(),
            seed: 3,
            prior: serde_json::Value::Null,
            config: serde_json::Value::Null,
            columns: trace_columns(&g, 2, 1, true),
        };
        let s = ModelState {
            sigma2: 0.1 + 0.2,
            psi: 1.0 / 3.0,
            weights: vec![std::f64::consts::PI, 1e-17],
            beta0: vec![-0.5, 2.0],
            beta: vec![0.7],
            sigma2_0: Some(1.1),
            sigma2_beta: Some(2.2),
            theta: None,
        };
        let mut w = TraceWriter::create(&path, &header).unwrap();
        w.append(7, &s).unwrap();
        w.append(8, &s).unwrap();
        w.flush().unwrap();
        let (h, rows) = read_trace(&path, 2, 2, 1).unwrap();
        assert_eq!(h, header);
        assert_eq!(rows, vec![(7, s.clone()), (8, s)]);
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = config_hash(&McmcConfigLike { seed: 1 }).unwrap();
        assert_eq!(a, config_hash(&McmcConfigLike { seed: 1 }).unwrap());
        assert_ne!(a, config_hash(&McmcConfigLike { seed: 2 }).unwrap());
        assert_eq!(a.len(), 16);
    }

    #[derive(Serialize)]
    struct McmcConfigLike {
        seed: u64,
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_json(&p, &vec![1, 2]).unwrap();
        write_json(&p, &vec![3]).unwrap();
        let v: Vec<i32> = read_json(&p).unwrap();
        assert_eq!(v, vec![3]);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
