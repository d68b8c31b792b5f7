use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{CurationConfig, SmellTaxonomy};
use crate::error::{Error, Result};
use crate::psc::{check_threshold, Statistic, DEFAULT_THRESHOLD};
use crate::stats::{check_level, BootstrapConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory of `<name>.py` method files, each with a `<name>.json` report beside it.
    pub corpus: Option<PathBuf>,
    /// JSON object `{method_id: count}`, or a trace file to count tokens from.
    pub token_counts: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub traces: BTreeMap<String, PathBuf>,
    pub scores: BTreeMap<String, PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// JSON taxonomy file; the built-in thirteen smells when absent.
    pub taxonomy: Option<PathBuf>,
    pub curation: CurationConfig,
    pub statistic: Statistic,
    pub threshold: f64,
    pub bootstrap: BootstrapConfig,
    /// Model ids; `compare` uses the first two.
    pub models: Vec<String>,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            taxonomy: None,
            curation: CurationConfig::default(),
            statistic: Statistic::Mean,
            threshold: DEFAULT_THRESHOLD,
            bootstrap: BootstrapConfig::default(),
            models: Vec::new(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    /// Reads a TOML config, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if path.extension().is_some_and(|ext| ext == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.curation.seed = seed;
        self.bootstrap.seed = seed;
    }

    pub fn taxonomy(&self) -> Result<SmellTaxonomy> {
        match &self.taxonomy {
            Some(path) => SmellTaxonomy::from_json_file(path),
            None => Ok(SmellTaxonomy::builtin()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_threshold(self.threshold)?;
        check_level(self.bootstrap.level)?;
        self.curation.validate()?;
        if self.bootstrap.resamples == 0 {
            return Err(Error::Config("bootstrap resamples must be at least 1".into()));
        }
        let p = &self.paths;
        let inputs: HashSet<&PathBuf> = [&self.taxonomy, &p.corpus, &p.token_counts]
            .into_iter()
            .flatten()
            .chain(p.traces.values())
            .collect();
        let mut outputs = HashSet::new();
        let written = [&p.manifest, &p.output_dir]
            .into_iter()
            .flatten()
            .chain(p.scores.values().collect::<HashSet<_>>());
        for path in written {
            if inputs.contains(path) || !outputs.insert(path) {
                return Err(Error::Config(format!("path {} is used twice", path.display())));
            }
        }
        Ok(())
    }
}

/// Returns the configured path, failing with a config error naming the key.
pub(crate) fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("`{key}` is not configured")))
}

pub(crate) fn must_exist(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!("{} does not exist", path.display())))
    }
}
