//! Output directory bookkeeping and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Config;
use crate::formats::to_json;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Seeds {
    pub learner: u64,
    pub pathplan: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Config,
    pub seeds: Seeds,
    pub absorptivity: Option<f64>,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub outputs: Vec<OutputEntry>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Files written by one command; `finish` records them in `manifest.json`.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    command: String,
    started: u64,
    files: Vec<OutputEntry>,
}

impl OutputDir {
    pub fn create(root: &Path, command: &str) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), command: command.to_string(), started: unix_now(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.retain(|f| f.path != rel);
        self.files.push(OutputEntry { path: rel.to_string(), bytes: contents.len() as u64 });
        Ok(path)
    }

    pub fn files(&self) -> &[OutputEntry] {
        &self.files
    }

    pub fn finish(self, config: &Config, absorptivity: Option<f64>) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: config.clone(),
            seeds: Seeds { learner: config.learner.seed, pathplan: config.pathplan.seed },
            absorptivity,
            started_unix_s: self.started,
            finished_unix_s: unix_now(),
            outputs: self.files,
        };
        let path = self.root.join("manifest.json");
        std::fs::write(&path, to_json(&manifest)).with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}
