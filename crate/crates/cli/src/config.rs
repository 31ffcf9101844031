//! Plain-text `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! pair_rate = 340000
//! duration_per_setting = 100
//! num_trials = 10
//! visibility_v = 0.99
//! efficiency = 0.6
//! seed = 2024
//! ```
//!
//! Unset keys keep their defaults. When `--config` is absent the path in
//! `COHWIT_CONFIG` is used, if set.

use std::path::{Path, PathBuf};

use cohwit_core::expsim::ExperimentConfig;

use crate::error::{CliError, CliResult};

pub const CONFIG_ENV: &str = "COHWIT_CONFIG";

pub fn parse_config(text: &str, mut cfg: ExperimentConfig) -> CliResult<ExperimentConfig> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| CliError::Usage(format!("config line {}: {key} needs {what}, got '{value}'", lineno + 1));
        match key {
            "pair_rate" => cfg.pair_rate = value.parse().map_err(|_| bad("a number"))?,
            "duration_per_setting" => cfg.duration_per_setting = value.parse().map_err(|_| bad("a number"))?,
            "num_trials" => cfg.num_trials = value.parse().map_err(|_| bad("an integer"))?,
            "visibility_v" => cfg.visibility_v = value.parse().map_err(|_| bad("a number"))?,
            "efficiency" => cfg.efficiency = value.parse().map_err(|_| bad("a number"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            other => return Err(CliError::Usage(format!("config line {}: unknown key '{other}'", lineno + 1))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Resolves the config file (flag, then environment) and loads it over the
/// defaults. Returns the path actually read, if any.
pub fn load(flag: Option<&Path>) -> CliResult<(ExperimentConfig, Option<PathBuf>)> {
    let path = flag.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let Some(path) = path else {
        return Ok((ExperimentConfig::default(), None));
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    Ok((parse_config(&text, ExperimentConfig::default())?, Some(path)))
}
