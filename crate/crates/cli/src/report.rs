use std::collections::BTreeMap;
use std::fmt;

use expander_core::cayley::CayleyError;
use expander_core::gamma_words::WordError;
use expander_core::quotient::{CacheError, QuotientError};
use expander_core::series::SeriesError;
use expander_core::spectra::SpectraError;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "expander-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// The statement being checked, in words.
    pub claim: String,
    pub passed: bool,
    pub data: Value,
}

impl Check {
    pub fn new(name: &str, claim: &str, passed: bool, data: impl Serialize) -> Check {
        Check {
            name: name.to_string(),
            claim: claim.to_string(),
            passed,
            data: serde_json::to_value(data).expect("report data serializes"),
        }
    }
}

/// Deterministic: no timings, no paths, keys sorted.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str, parameters: BTreeMap<String, Value>, checks: Vec<Check>) -> Report {
        Report {
            schema: SCHEMA,
            tool_version: TOOL_VERSION,
            command: command.to_string(),
            parameters,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag}  {}: {}\n", c.name, c.claim));
        }
        out.push_str(&format!(
            "{}\n",
            if self.passed { "all checks passed" } else { "some checks FAILED" }
        ));
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub threads: usize,
    /// Cache file name to SHA-256.
    pub cache_checksums: BTreeMap<String, String>,
    pub report_sha256: String,
    pub wall_time_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Resource(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Resource(_) => 2,
            CliError::Usage(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Resource(m) => write!(f, "resource limit: {m}"),
            CliError::Failure(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<QuotientError> for CliError {
    fn from(e: QuotientError) -> Self {
        match e {
            QuotientError::CapExceeded { .. } | QuotientError::ResourceLimit { .. } => {
                CliError::Resource(e.to_string())
            }
            QuotientError::LevelNotBelow { .. } | QuotientError::BadOrdinal(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<CayleyError> for CliError {
    fn from(e: CayleyError) -> Self {
        match e {
            CayleyError::Quotient(q) => q.into(),
            CayleyError::UnknownFormat(_) | CayleyError::LevelZero | CayleyError::NotConsecutive { .. } => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::NoConvergence { .. } | SpectraError::TooLargeForDense(_) => {
                CliError::Resource(e.to_string())
            }
            SpectraError::NoSecondEigenvalue => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<WordError> for CliError {
    fn from(e: WordError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}
