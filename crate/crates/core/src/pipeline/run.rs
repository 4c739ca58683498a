//! File-backed pipeline steps sharing one output directory:
//!
//! ```text
//! <out>/resolved_config.json
//! <out>/panel.csv
//! <out>/corpus.txt
//! <out>/embedding.txt, embedding.meta.json
//! <out>/report/...           every plot-ready file plus manifest.json
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::report::{self, Manifest};
use super::{
    dimension_sweep, read_target_csv, regression_experiment, sector_projection, sectors_from_panel, variance_analysis,
    PipelineError, RegressionExperiment, RegressionOptions, Result, RunConfig, SweepOptions, SweepResult, VarianceCurve,
};
use crate::corpus::{build_sentences, corpus_stats, CorpusStats, SentenceCorpus};
use crate::fixtures::{write_bundle, MarketSpec};
use crate::ingest::{load_panel, ChangePanel, IngestError};
use crate::sgns::{train, Embedding, Hyperparams};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub tickers: usize,
    pub days: usize,
    pub rows_read: usize,
    pub dropped_rows: usize,
    pub duplicate_rows: usize,
    pub outliers: usize,
    pub unmatched_price_tickers: usize,
    pub unmatched_company_tickers: usize,
}

pub struct Runner {
    pub config: RunConfig,
}

impl Runner {
    /// Validates the config; nothing is written yet.
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.out_dir
    }

    pub fn panel_path(&self) -> PathBuf {
        self.out_dir().join("panel.csv")
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.out_dir().join("corpus.txt")
    }

    pub fn embedding_path(&self) -> PathBuf {
        self.out_dir().join("embedding.txt")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out_dir().join("report")
    }

    fn ensure_dir(dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))
    }

    pub fn write_resolved_config(&self) -> Result<PathBuf> {
        Self::ensure_dir(self.out_dir())?;
        let path = self.out_dir().join("resolved_config.json");
        let mut text = serde_json::to_string_pretty(&self.config).expect("config serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))?;
        Ok(path)
    }

    fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        p.as_deref()
            .ok_or_else(|| PipelineError::InvalidConfig(format!("no {what} file configured")))
    }

    /// Parse the CSVs into the change panel without touching the disk.
    pub fn load_inputs(&self) -> Result<(ChangePanel, IngestSummary)> {
        let prices = Self::required(&self.config.prices, "price")?;
        let companies = Self::required(&self.config.companies, "company")?;
        let (panel, price_report, _) = load_panel(prices, companies, self.config.aliases.as_deref())?;
        let summary = IngestSummary {
            tickers: panel.n_tickers(),
            days: panel.n_days(),
            rows_read: price_report.rows_read,
            dropped_rows: price_report.dropped(),
            duplicate_rows: price_report.duplicates,
            outliers: panel.report.outliers.len(),
            unmatched_price_tickers: panel.report.unmatched_price_tickers.len(),
            unmatched_company_tickers: panel.report.unmatched_company_tickers.len(),
        };
        Ok((panel, summary))
    }

    pub fn ingest(&self) -> Result<IngestSummary> {
        let (panel, summary) = self.load_inputs()?;
        Self::ensure_dir(self.out_dir())?;
        let path = self.panel_path();
        let file = File::create(&path).map_err(|e| PipelineError::io(&path, e))?;
        panel
            .write_cache(BufWriter::new(file))
            .map_err(|e| PipelineError::io(&path, e))?;
        Ok(summary)
    }

    pub fn load_panel(&self) -> Result<ChangePanel> {
        let path = self.panel_path();
        if !path.is_file() {
            return Err(IngestError::FileNotFound(path).into());
        }
        Ok(ChangePanel::read_cache_file(&path)?)
    }

    fn corpus_from(&self, panel: &ChangePanel) -> Result<SentenceCorpus> {
        Ok(build_sentences(panel, self.config.order)?)
    }

    pub fn build_corpus(&self) -> Result<(SentenceCorpus, CorpusStats)> {
        let corpus = self.corpus_from(&self.load_panel()?)?;
        let path = self.corpus_path();
        fs::write(&path, corpus.to_text()).map_err(|e| PipelineError::io(&path, e))?;
        let stats = corpus_stats(&corpus);
        Ok((corpus, stats))
    }

    pub fn hyperparams(&self, dimension: Option<usize>) -> Hyperparams {
        let mut hp = self.config.effective_hyperparams();
        if let Some(d) = dimension {
            hp.dimension = d;
        }
        hp
    }

    /// Build the corpus from the panel cache and train at the configured
    /// dimension (or `dimension`), writing the corpus and the embedding.
    pub fn train(&self, dimension: Option<usize>) -> Result<Embedding> {
        let hp = self.hyperparams(dimension);
        hp.validate().map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        let (corpus, _) = self.build_corpus()?;
        let e = train(&corpus, &hp)?;
        e.save(&self.embedding_path())?;
        e.save_metadata(&self.out_dir().join("embedding.meta.json"))?;
        Ok(e)
    }

    pub fn load_embedding(&self) -> Result<Embedding> {
        let path = self.embedding_path();
        if !path.is_file() {
            return Err(IngestError::FileNotFound(path).into());
        }
        Ok(Embedding::load(&path)?)
    }

    pub fn sweep(&self) -> Result<SweepResult> {
        let panel = self.load_panel()?;
        let corpus = self.corpus_from(&panel)?;
        let opts = SweepOptions {
            split_fraction: self.config.split_fraction,
            epsilon: self.config.epsilon,
            classifiers: self.config.classifiers.clone(),
        };
        let result = dimension_sweep(
            &corpus,
            &self.config.sweep_dims,
            &self.hyperparams(None),
            &sectors_from_panel(&panel),
            &opts,
        )?;
        Self::ensure_dir(&self.report_dir())?;
        report::write_sweep(&self.report_dir(), &result)?;
        Ok(result)
    }

    /// Variance curve of a `high_dim` embedding, plus the sector projection of
    /// the trained embedding in `embedding.txt`.
    pub fn pca(&self) -> Result<VarianceCurve> {
        let panel = self.load_panel()?;
        let e = self.load_embedding()?;
        let corpus = self.corpus_from(&panel)?;
        let high = self.config.high_dim;
        let m_values: Vec<usize> = (1..=high).collect();
        let (curve, _) = variance_analysis(&corpus, high, &self.hyperparams(None), &m_values)?;
        let projection = sector_projection(&e, &sectors_from_panel(&panel))?;
        Self::ensure_dir(&self.report_dir())?;
        report::write_variance(&self.report_dir(), &curve)?;
        report::write_projection(&self.report_dir(), &projection)?;
        Ok(curve)
    }

    pub fn regression_options(&self) -> RegressionOptions {
        RegressionOptions {
            info_criterion: self.config.info_criterion,
            forest: self.config.classifiers.forest.clone(),
            importance_repeats: self.config.importance_repeats,
            split_fraction: self.config.split_fraction,
            seed: self.config.seed,
        }
    }

    pub fn regress(&self) -> Result<Vec<RegressionExperiment>> {
        let e = self.load_embedding()?;
        let opts = self.regression_options();
        let mut out = Vec::new();
        for spec in &self.config.targets {
            let table = read_target_csv(spec)?;
            out.push(regression_experiment(&table, &e, &opts)?);
        }
        Self::ensure_dir(&self.report_dir())?;
        for r in &out {
            report::write_regression(&self.report_dir(), r)?;
        }
        Ok(out)
    }

    /// Manifest over everything currently in the report directory.
    pub fn report(&self) -> Result<Manifest> {
        Self::ensure_dir(&self.report_dir())?;
        report::write_manifest(&self.report_dir())
    }
}

/// Train an embedding straight from the configured CSVs, exactly as
/// `ingest` followed by `train` would.
pub fn embedding_from_inputs(config: &RunConfig) -> Result<Embedding> {
    let runner = Runner::new(config.clone())?;
    let (panel, _) = runner.load_inputs()?;
    // the cache round-trips values exactly, so this matches the on-disk path
    let corpus = runner.corpus_from(&panel)?;
    Ok(train(&corpus, &runner.hyperparams(None))?)
}

/// Config shipped with the synthetic fixture bundle; paths are relative to it.
pub const FIXTURE_CONFIG: &str = r#"{
  "prices": "prices.csv",
  "companies": "companies.csv",
  "targets": [
    {
      "name": "employees",
      "path": "employees.csv",
      "ticker_column": "Ticker",
      "target_column": "Employees",
      "baseline_columns": ["MarketCap"]
    },
    {
      "name": "esg",
      "path": "esg.csv",
      "ticker_column": "ticker",
      "target_column": "ESG_Risk",
      "baseline_columns": ["Controversy", "Leverage", "Float"]
    }
  ],
  "out_dir": "out",
  "seed": 7
}
"#;

enum BundleError {
    Io(std::io::Error),
    Pipeline(PipelineError),
}

impl From<std::io::Error> for BundleError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// Write the synthetic market, train its embedding with [`FIXTURE_CONFIG`],
/// and plant the two regression targets on that embedding.
pub fn write_fixture_bundle(dir: &Path) -> Result<Vec<PathBuf>> {
    let written = write_bundle(dir, &MarketSpec::bundled(), FIXTURE_CONFIG, |d: &Path| {
        let mut cfg = RunConfig::load(&d.join("config.json")).map_err(BundleError::Pipeline)?;
        // the target files do not exist yet
        cfg.targets.clear();
        embedding_from_inputs(&cfg).map_err(BundleError::Pipeline)
    });
    written.map_err(|e| match e {
        BundleError::Io(e) => PipelineError::io(dir, e),
        BundleError::Pipeline(e) => e,
    })
}
