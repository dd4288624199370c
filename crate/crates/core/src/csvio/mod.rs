//! CSV formats shared by the command-line tool and the tests.
//!
//! Every file opens with one `#` comment line naming the file kind, the
//! configuration hash and the seed, followed by free `key=value` fields:
//!
//! ```text
//! # twoam trace config=3f2a9c01 seed=7 protocol=2am replicas=5 clients=5
//! op_id,client_id,kind,key,version,invoke_time_s,response_time_s
//! 0,0,W,0,1,0.012000000000,0.043000000000
//! ```

mod compare;
mod report;
mod theory;
mod trace;

use std::fmt;

use thiserror::Error;

pub use compare::{compare, write_comparison, ComparisonRow, COMPARED_METRICS};
pub use report::{read_report, write_report, Report};
pub use theory::{read_theory, write_theory, THEORY_COLUMNS};
pub use trace::{read_trace, write_trace, TRACE_COLUMNS};

/// The `#` line at the top of every output file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub kind: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub fields: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(kind: &str, config_hash: &str, seed: Option<u64>) -> Self {
        Provenance {
            kind: kind.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            fields: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Parses a comment line; `None` if it is not a provenance line.
    pub fn parse(line: &str) -> Option<Self> {
        let mut words = line.strip_prefix('#')?.split_whitespace();
        if words.next()? != "twoam" {
            return None;
        }
        let mut p = Provenance {
            kind: words.next()?.to_string(),
            ..Provenance::default()
        };
        for word in words {
            let (k, v) = word.split_once('=')?;
            match k {
                "config" => p.config_hash = v.to_string(),
                "seed" => p.seed = v.parse().ok(),
                _ => p.fields.push((k.to_string(), v.to_string())),
            }
        }
        Some(p)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "# twoam {} config={}", self.kind, self.config_hash)?;
        match self.seed {
            Some(s) => write!(f, " seed={s}")?,
            None => write!(f, " seed=none")?,
        }
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("{0}")]
    Mismatch(String),
}

impl CsvError {
    fn row(line: u64, message: impl Into<String>) -> Self {
        CsvError::Row {
            line,
            message: message.into(),
        }
    }
}

impl From<csv::Error> for CsvError {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CsvError::Io(io),
            other => CsvError::row(line, format!("{other:?}")),
        }
    }
}

/// Splits leading `#` lines from the CSV body. Returns the provenance (if
/// any), the number of comment lines and the body.
fn split_header(text: &str) -> (Option<Provenance>, u64, &str) {
    let mut provenance = None;
    let mut skipped = 0;
    let mut rest = text;
    while rest.starts_with('#') {
        let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
        if provenance.is_none() {
            provenance = Provenance::parse(line.trim_end());
        }
        skipped += 1;
        rest = tail;
    }
    (provenance, skipped, rest)
}

fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), CsvError> {
    let found: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if found != expected {
        return Err(CsvError::Header {
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}
