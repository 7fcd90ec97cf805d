use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ScenarioConfig;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Lt,
    Le,
    Ge,
    Eq,
}

/// One physics check: `value <relation> threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
    /// Distance to the threshold, positive on the passing side.
    pub margin: f64,
}

impl CheckOutcome {
    pub fn new(name: &str, value: f64, relation: Relation, threshold: f64) -> Self {
        let (passed, margin) = match relation {
            Relation::Lt => (value < threshold, threshold - value),
            Relation::Le => (value <= threshold, threshold - value),
            Relation::Ge => (value >= threshold, value - threshold),
            Relation::Eq => (value == threshold, 0.0 - (value - threshold).abs()),
        };
        Self {
            name: name.to_string(),
            value,
            relation,
            threshold,
            passed: passed && value.is_finite(),
            margin,
        }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self::new(name, f64::from(u8::from(ok)), Relation::Eq, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Collects a run's outputs, hashing each one and writing it when a
/// directory is attached.
#[derive(Debug, Default)]
pub struct Artifacts {
    dir: Option<PathBuf>,
    files: Vec<FileRecord>,
}

impl Artifacts {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            files: Vec::new(),
        })
    }

    pub fn emit<F>(&mut self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf)?;
        if let Some(d) = &self.dir {
            fs::write(d.join(name), &buf)?;
        }
        self.files.push(FileRecord {
            name: name.to_string(),
            sha256: hex(&Sha256::digest(&buf)),
            bytes: buf.len() as u64,
        });
        Ok(())
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn into_files(self) -> Vec<FileRecord> {
        self.files
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileRecord>,
    pub checks: Vec<CheckOutcome>,
    /// Headline numbers of the run.
    pub results: BTreeMap<String, f64>,
    pub passed: bool,
}

impl RunManifest {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub const MANIFEST_NAME: &str = "manifest.json";
