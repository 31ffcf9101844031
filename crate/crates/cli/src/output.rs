//! One output directory per invocation. `manifest.json` is written before
//! any data file and rewritten on completion with the full file list.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cohwit_core::expsim::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    /// Paths relative to the output directory, in write order.
    pub outputs: Vec<String>,
    /// `running` until the command returns, then `complete`.
    pub status: String,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))
    }
}

pub struct RunDir {
    root: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

impl RunDir {
    pub fn create(root: &Path, command: &str, args: Vec<String>, config: ExperimentConfig) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(format!("creating {}", root.display()), e))?;
        let versions = BTreeMap::from([
            ("cohwit".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("cohwit-core".to_string(), cohwit_core::VERSION.to_string()),
        ]);
        let manifest = RunManifest {
            command: command.to_string(),
            args,
            config,
            seed: config.seed,
            versions,
            outputs: Vec::new(),
            status: "running".into(),
            wall_clock_seconds: 0.0,
        };
        let run = Self { root: root.to_path_buf(), manifest, started: Instant::now() };
        run.write_manifest()?;
        Ok(run)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn write_manifest(&self) -> CliResult<()> {
        let path = self.root.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    fn target(&mut self, rel: &str) -> CliResult<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(format!("creating {}", parent.display()), e))?;
        }
        if !self.manifest.outputs.iter().any(|o| o == rel) {
            self.manifest.outputs.push(rel.to_string());
        }
        Ok(path)
    }

    pub fn write_csv<T: Serialize>(&mut self, rel: &str, rows: &[T]) -> CliResult<()> {
        let path = self.target(rel)?;
        let mut w = csv::Writer::from_path(&path)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    /// CSV with an explicit header, for files whose columns vary.
    pub fn write_records(&mut self, rel: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        let path = self.target(rel)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> CliResult<()> {
        let path = self.target(rel)?;
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    pub fn finish(mut self) -> CliResult<RunManifest> {
        self.manifest.status = "complete".into();
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        self.write_manifest()?;
        Ok(self.manifest)
    }
}
