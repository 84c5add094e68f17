use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::fail::Outcome;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Limits {
    pub exact_max_n: usize,
    pub brute_force_max_n: usize,
    pub max_comparisons: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// A file's text with its digest.
pub struct Input {
    pub text: String,
    pub digest: InputDigest,
}

pub fn read_input(path: &Path) -> Outcome<Input> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    Ok(Input {
        text,
        digest: InputDigest {
            path: path.display().to_string(),
            sha256,
        },
    })
}

/// The machine-readable part of every command's output. Identical for
/// identical arguments and inputs.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    /// The seed every random choice derived from (0 when the command
    /// draws nothing).
    pub seed: u64,
    pub limits: Limits,
    pub inputs: Vec<InputDigest>,
    pub result: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Readable lines followed by a one-line JSON footer.
    Human,
    /// A single JSON document.
    Json,
}

/// What a command prints: free-form lines (human format only) and the
/// structured report.
pub struct Output {
    pub lines: Vec<String>,
    pub report: Report,
    /// Set when a checked identity or bound failed; the report is still
    /// printed and the process exits with status 2.
    pub violation: Option<String>,
}

impl Output {
    pub fn print(&self, format: Format) {
        match format {
            Format::Human => {
                for l in &self.lines {
                    println!("{l}");
                }
                println!("--- {}", serde_json::to_string(&self.report).expect("serializable"));
            }
            Format::Json => {
                println!("{}", serde_json::to_string_pretty(&self.report).expect("serializable"));
            }
        }
    }
}
