use std::fmt;
use std::path::Path;

use graphcov::Error;

/// Raised when the sampler itself fails, after a diagnostic dump was written.
#[derive(Debug)]
pub struct SamplerFailure(pub String);

impl fmt::Display for SamplerFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sampler failure: {}", self.0)
    }
}

impl std::error::Error for SamplerFailure {}

/// 2 for unreadable input, 3 for graph or domain errors, 4 for sampler failures.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<SamplerFailure>() {
            return 4;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                _ if err.is_parse() => 2,
                Error::NotPositiveDefinite
                | Error::ConjugacyUnavailable { .. }
                | Error::ChainTooShort { .. }
                | Error::DegenerateVariance(_) => 4,
                _ => 3,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

/// Comma-joined CSV row with the run's seed and config hash appended.
pub struct Table {
    text: String,
    seed: u64,
    hash: String,
}

impl Table {
    pub fn new(columns: &[&str], seed: u64, hash: &str) -> Self {
        let mut text = columns.join(",");
        text.push_str(",seed,config_hash\n");
        Self { text, seed, hash: hash.to_string() }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push_str(&format!(",{},{}\n", self.seed, self.hash));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Write to `path` when given, otherwise print.
    pub fn emit(&self, path: Option<&Path>) -> anyhow::Result<()> {
        match path {
            Some(p) => graphcov::io::atomic_write(p, self.text.as_bytes())?,
            None => print!("{}", self.text),
        }
        Ok(())
    }
}
