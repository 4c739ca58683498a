//! The three experiments built on the embedding: the dimensionality sweep
//! with plateau selection, PCA variance and projection, and paired OLS
//! regressions with permutation importance. Report files are written by
//! [`report`].

mod config;
mod regression;
pub mod report;
mod sweep;
pub mod run;
mod variance;

pub use config::{RunConfig, TargetSpec};
pub use regression::{
    read_target_csv, read_target_reader, regression_experiment, RegressionExperiment, RegressionOptions, ResidualRow,
    TargetTable, REGRESSION_DIM,
};
pub use sweep::{dimension_sweep, evaluate_embedding, sector_dataset, select_dimension, SweepOptions, SweepResult};
pub use report::{emit_report, Manifest, ManifestEntry, ReportSet};
pub use variance::{sector_projection, variance_analysis, variance_curve, ProjectionRow, VarianceCurve};

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::classify::ClassifyError;
use crate::corpus::CorpusError;
use crate::ingest::{ChangePanel, CompanyTable, IngestError};
use crate::sgns::SgnsError;
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Sgns(#[from] SgnsError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("ticker {0} has no sector")]
    MissingSector(String),
    #[error("no rows of {target} match the embedding vocabulary")]
    JoinEmpty { target: String },
    #[error("{path}: line {line}: {message}")]
    TargetFormat { path: PathBuf, line: usize, message: String },
    #[error("regression needs a {expected}-dimensional embedding, got {got}")]
    EmbeddingDimension { expected: usize, got: usize },
    #[error("{model} design is rank deficient at column {column:?}")]
    RankDeficient { model: String, column: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Bad or missing input as opposed to a failure during computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            Self::Ingest(_)
            | Self::Corpus(_)
            | Self::MissingSector(_)
            | Self::JoinEmpty { .. }
            | Self::TargetFormat { .. }
            | Self::EmbeddingDimension { .. }
            | Self::InvalidConfig(_)
            | Self::Io { .. } => true,
            Self::Sgns(e) => matches!(
                e,
                SgnsError::InvalidHyperparams(_) | SgnsError::Format { .. } | SgnsError::Io(_)
            ),
            Self::Classify(_) | Self::Stats(_) | Self::RankDeficient { .. } => false,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Ticker -> sector lookup.
pub type SectorMap = BTreeMap<String, String>;

pub fn sectors_from_panel(panel: &ChangePanel) -> SectorMap {
    panel.tickers().iter().cloned().zip(panel.sectors().iter().cloned()).collect()
}

pub fn sectors_from_companies(companies: &CompanyTable) -> SectorMap {
    companies
        .records
        .iter()
        .map(|r| (r.ticker.clone(), r.sector.clone()))
        .collect()
}
