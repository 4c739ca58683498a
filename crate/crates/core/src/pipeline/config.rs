use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::classify::ClassifierSuite;
use crate::corpus::Order;
use crate::sgns::Hyperparams;
use crate::stats::InfoCriterion;

/// A regression target file and the columns to read from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    /// Used in report file names, e.g. `summary_<name>_baseline.json`.
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_ticker_column")]
    pub ticker_column: String,
    pub target_column: String,
    #[serde(default)]
    pub baseline_columns: Vec<String>,
}

fn default_ticker_column() -> String {
    "ticker".into()
}

/// Everything a run needs. Relative paths in a config file are resolved
/// against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub prices: Option<PathBuf>,
    pub companies: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
    pub targets: Vec<TargetSpec>,
    pub out_dir: PathBuf,
    pub order: Order,
    /// `seed` and `workers` here are overridden by the top-level fields.
    pub hyperparams: Hyperparams,
    pub sweep_dims: Vec<usize>,
    pub epsilon: f64,
    pub high_dim: usize,
    pub split_fraction: f64,
    pub seed: u64,
    pub workers: usize,
    pub classifiers: ClassifierSuite,
    pub importance_repeats: usize,
    pub info_criterion: InfoCriterion,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            prices: None,
            companies: None,
            aliases: None,
            targets: Vec::new(),
            out_dir: PathBuf::from("out"),
            order: Order::Descending,
            hyperparams: Hyperparams::default(),
            sweep_dims: vec![1, 2, 3, 4, 5, 6, 7, 8, 16, 32],
            epsilon: 0.02,
            high_dim: 32,
            split_fraction: 0.7,
            seed: 1,
            workers: 1,
            classifiers: ClassifierSuite::default(),
            importance_repeats: 20,
            info_criterion: InfoCriterion::CountVariance,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| PipelineError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    /// Make every relative path absolute with respect to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.prices, &mut self.companies, &mut self.aliases].into_iter().flatten() {
            fix(p);
        }
        for t in &mut self.targets {
            fix(&mut t.path);
        }
        fix(&mut self.out_dir);
    }

    /// Hyperparameters with the run's seed and worker count applied.
    pub fn effective_hyperparams(&self) -> Hyperparams {
        Hyperparams {
            seed: self.seed,
            workers: self.workers,
            ..self.hyperparams.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        self.effective_hyperparams()
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return bad(format!("split_fraction {} outside (0, 1)", self.split_fraction));
        }
        if self.sweep_dims.is_empty() || self.sweep_dims.contains(&0) {
            return bad("sweep_dims must be non-empty and every dimension >= 1".into());
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.high_dim == 0 {
            return bad("high_dim must be >= 1".into());
        }
        if self.importance_repeats == 0 {
            return bad("importance_repeats must be >= 1".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for t in &self.targets {
            if t.name.is_empty() || !t.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return bad(format!("target name {:?} must be non-empty [A-Za-z0-9_-]", t.name));
            }
            if !names.insert(&t.name) {
                return bad(format!("duplicate target name {:?}", t.name));
            }
        }
        let inputs = [&self.prices, &self.companies, &self.aliases]
            .into_iter()
            .flatten()
            .chain(self.targets.iter().map(|t| &t.path));
        for p in inputs {
            if !p.is_file() {
                return Err(PipelineError::Ingest(crate::ingest::IngestError::FileNotFound(p.clone())));
            }
        }
        Ok(())
    }
}
