//! Axiom reports shared by every checker, and the versioned JSON envelope.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub decomposition_hash: String,
    pub subset: Vec<usize>,
    pub lhs: i64,
    pub rhs: i64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub domain: String,
    pub instances: u64,
    #[serde(default)]
    pub skipped: u64,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn new(axiom: impl Into<String>, domain: impl Into<String>) -> Self {
        Self {
            axiom: axiom.into(),
            domain: domain.into(),
            instances: 0,
            skipped: 0,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Violation) {
        self.instances += 1;
        if !ok {
            self.violations.push(witness());
        }
    }

    /// Adds another report's counts and witnesses, then sorts witnesses.
    pub fn merge(&mut self, other: AxiomReport) {
        self.instances += other.instances;
        self.skipped += other.skipped;
        self.violations.extend(other.violations);
        self.violations.sort();
    }
}

/// Merges per-sample reports axiom by axiom; all inputs share one layout.
pub fn merge_all(parts: impl IntoIterator<Item = Vec<AxiomReport>>) -> Vec<AxiomReport> {
    let mut out: Vec<AxiomReport> = Vec::new();
    for part in parts {
        if out.is_empty() {
            out = part;
            continue;
        }
        for (acc, r) in out.iter_mut().zip(part) {
            acc.merge(r);
        }
    }
    for r in &mut out {
        r.violations.sort();
    }
    out
}

/// Top-level JSON document written by the command line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema: u32,
    pub command: String,
    pub pass: bool,
    pub result: T,
}

impl<T> Envelope<T> {
    pub fn new(command: impl Into<String>, pass: bool, result: T) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command: command.into(),
            pass,
            result,
        }
    }
}

/// Short stable digest of a coloring, used to name decompositions.
pub fn decomposition_hash(colors: &[u8]) -> String {
    let digest = Sha256::digest(colors);
    hex::encode(&digest[..8])
}
