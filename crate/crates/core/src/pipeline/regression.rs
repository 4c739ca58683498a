use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result, TargetSpec};
use crate::classify::{permutation_importance, r2_score, ForestParams, ImportanceReport, RandomForestRegressor};
use crate::sgns::Embedding;
use crate::stats::{ols_fit, ols_summary_with, InfoCriterion, Matrix, RegressionSummary, StatsError, SummaryOptions};

/// Embedding width the regression experiments are defined for.
pub const REGRESSION_DIM: usize = 4;

/// Numeric rows of a target file keyed by upper-cased ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetTable {
    pub name: String,
    pub target_column: String,
    pub baseline_columns: Vec<String>,
    pub tickers: Vec<String>,
    pub y: Vec<f64>,
    /// `baseline[i]` holds row `i`'s values in `baseline_columns` order.
    pub baseline: Vec<Vec<f64>>,
    /// Rows skipped for an empty target or baseline cell.
    pub incomplete_rows: usize,
}

pub fn read_target_csv(spec: &TargetSpec) -> Result<TargetTable> {
    let file = File::open(&spec.path).map_err(|e| PipelineError::io(&spec.path, e))?;
    read_target_reader(file, spec)
}

pub fn read_target_reader<R: Read>(reader: R, spec: &TargetSpec) -> Result<TargetTable> {
    let path = spec.path.clone();
    let format = |line: usize, message: String| PipelineError::TargetFormat {
        path: path.clone(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| format(1, e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format(1, format!("missing column {name:?}")))
    };
    let ticker_col = find(&spec.ticker_column)?;
    let target_col = find(&spec.target_column)?;
    let baseline_cols = spec.baseline_columns.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;

    let mut table = TargetTable {
        name: spec.name.clone(),
        target_column: spec.target_column.clone(),
        baseline_columns: spec.baseline_columns.clone(),
        tickers: Vec::new(),
        y: Vec::new(),
        baseline: Vec::new(),
        incomplete_rows: 0,
    };
    let mut seen = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| format(line, e.to_string()))?;
        let cell = |c: usize| record.get(c).unwrap_or("");
        let ticker = cell(ticker_col).to_ascii_uppercase();
        if ticker.is_empty() {
            return Err(format(line, "empty ticker".into()));
        }
        if let Some(first) = seen.insert(ticker.clone(), line) {
            return Err(format(line, format!("ticker {ticker} already appears on line {first}")));
        }
        let mut values = Vec::with_capacity(1 + baseline_cols.len());
        let mut incomplete = false;
        for &c in std::iter::once(&target_col).chain(&baseline_cols) {
            let raw = cell(c);
            if raw.is_empty() {
                incomplete = true;
                break;
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| format(line, format!("column {:?}: {raw:?} is not a number", &headers[c])))?;
            if !v.is_finite() {
                return Err(format(line, format!("column {:?}: non-finite value", &headers[c])));
            }
            values.push(v);
        }
        if incomplete {
            table.incomplete_rows += 1;
            continue;
        }
        table.tickers.push(ticker);
        table.y.push(values[0]);
        table.baseline.push(values[1..].to_vec());
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressionOptions {
    pub info_criterion: InfoCriterion,
    pub forest: ForestParams,
    pub importance_repeats: usize,
    /// Share of joined rows the importance surrogate is trained on; the rest
    /// is used to measure permutation importance.
    pub split_fraction: f64,
    pub seed: u64,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        Self {
            info_criterion: InfoCriterion::CountVariance,
            forest: ForestParams::default(),
            importance_repeats: 20,
            split_fraction: 0.7,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub ticker: String,
    pub observed: f64,
    pub fitted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionExperiment {
    pub target: String,
    pub baseline: RegressionSummary,
    pub augmented: RegressionSummary,
    /// Permutation importance over the augmented design, measured as the drop
    /// in held-out R² of a random-forest surrogate.
    pub importance: ImportanceReport,
    /// Mean impurity decrease of the same forest, normalized to sum to 1.
    pub impurity_importance: Vec<f64>,
    pub joined_rows: usize,
    /// Target rows whose ticker is not in the embedding.
    pub dropped_rows: usize,
    /// Augmented model residuals, in joined-row order.
    pub residuals: Vec<ResidualRow>,
}

impl RegressionExperiment {
    pub fn r2_gain(&self) -> f64 {
        self.augmented.r2 - self.baseline.r2
    }
}

fn fit_summary(model: &str, x: &Matrix, y: &[f64], names: &[String], dep: &str, ic: InfoCriterion) -> Result<(RegressionSummary, Vec<f64>)> {
    let fit = ols_fit(x, y).map_err(|e| match e {
        StatsError::RankDeficient { column } => PipelineError::RankDeficient {
            model: model.into(),
            column: if column == 0 {
                "const".into()
            } else {
                names[column - 1].clone()
            },
        },
        other => other.into(),
    })?;
    let opts = SummaryOptions {
        dep_var: Some(dep.into()),
        names: Some(names.to_vec()),
        info_criterion: ic,
    };
    Ok((ols_summary_with(&fit, x, y, &opts), fit.fitted))
}

/// Join `table` with the embedding, fit baseline and augmented OLS, and
/// estimate feature importance over the augmented design.
pub fn regression_experiment(table: &TargetTable, e: &Embedding, opts: &RegressionOptions) -> Result<RegressionExperiment> {
    if e.dim() != REGRESSION_DIM {
        return Err(PipelineError::EmbeddingDimension {
            expected: REGRESSION_DIM,
            got: e.dim(),
        });
    }
    let mut rows = Vec::new();
    for (i, t) in table.tickers.iter().enumerate() {
        if let Some(pos) = e.position(t) {
            rows.push((i, pos));
        }
    }
    if rows.is_empty() {
        return Err(PipelineError::JoinEmpty {
            target: table.name.clone(),
        });
    }
    let dropped_rows = table.tickers.len() - rows.len();
    let y: Vec<f64> = rows.iter().map(|&(i, _)| table.y[i]).collect();
    let base_rows: Vec<Vec<f64>> = rows.iter().map(|&(i, _)| table.baseline[i].clone()).collect();
    let aug_rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|&(i, pos)| table.baseline[i].iter().chain(e.row(pos)).copied().collect())
        .collect();
    let base_x = if base_rows[0].is_empty() {
        Matrix::zeros(rows.len(), 0)
    } else {
        Matrix::from_rows(&base_rows)
    };
    let aug_x = Matrix::from_rows(&aug_rows);
    let base_names = table.baseline_columns.clone();
    let aug_names: Vec<String> = base_names.iter().cloned().chain(e.feature_names()).collect();

    let dep = &table.target_column;
    let ic = opts.info_criterion;
    let (baseline, _) = fit_summary("baseline", &base_x, &y, &base_names, dep, ic)?;
    let (augmented, fitted) = fit_summary("augmented", &aug_x, &y, &aug_names, dep, ic)?;

    let (train_idx, test_idx) = shuffle_split(rows.len(), opts.split_fraction, opts.seed);
    let train_y: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();
    let test_y: Vec<f64> = test_idx.iter().map(|&i| y[i]).collect();
    let forest = RandomForestRegressor::fit(&aug_x.select_rows(&train_idx), &train_y, &opts.forest, opts.seed)?;
    let test_x = aug_x.select_rows(&test_idx);
    let metric = |x: &Matrix| r2_score(&test_y, &forest.predict(x).expect("feature count fixed"));
    let importance = permutation_importance(&test_x, &aug_names, metric, opts.importance_repeats, opts.seed)?;

    let residuals = rows
        .iter()
        .zip(&y)
        .zip(&fitted)
        .map(|((&(i, _), &obs), &fit)| ResidualRow {
            ticker: table.tickers[i].clone(),
            observed: obs,
            fitted: fit,
            residual: obs - fit,
        })
        .collect();

    Ok(RegressionExperiment {
        target: table.name.clone(),
        baseline,
        augmented,
        importance,
        impurity_importance: forest.feature_importances(),
        joined_rows: rows.len(),
        dropped_rows,
        residuals,
    })
}

/// Random train/test index split; both sides come back sorted. Each side
/// keeps at least one row when `n >= 2`.
fn shuffle_split(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = ((fraction * n as f64).round() as usize).clamp(1.min(n), n.saturating_sub(1).max(1));
    let (a, b) = idx.split_at(k);
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn spec(cols: &[&str]) -> TargetSpec {
        TargetSpec {
            name: "t".into(),
            path: PathBuf::from("t.csv"),
            ticker_column: "ticker".into(),
            target_column: "y".into(),
            baseline_columns: cols.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn reads_and_normalizes() {
        let csv = "ticker,y,x\n aapl ,1.5,2\nmsft,,3\nibm,2.5,4\n";
        let t = read_target_reader(csv.as_bytes(), &spec(&["x"])).unwrap();
        assert_eq!(t.tickers, ["AAPL", "IBM"]);
        assert_eq!(t.y, [1.5, 2.5]);
        assert_eq!(t.baseline, [vec![2.0], vec![4.0]]);
        assert_eq!(t.incomplete_rows, 1);
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let err = read_target_reader("ticker,y\nA,1\nB,abc\n".as_bytes(), &spec(&[])).unwrap_err();
        assert!(matches!(err, PipelineError::TargetFormat { line: 3, .. }), "{err}");
        let err = read_target_reader("ticker,y\nA,1\n".as_bytes(), &spec(&["cap"])).unwrap_err();
        assert!(err.to_string().contains("\"cap\""));
        let err = read_target_reader("ticker,y\nA,1\na,2\n".as_bytes(), &spec(&[])).unwrap_err();
        assert!(matches!(err, PipelineError::TargetFormat { line: 3, .. }));
    }

    #[test]
    fn split_sizes() {
        let (a, b) = shuffle_split(10, 0.7, 3);
        assert_eq!((a.len(), b.len()), (7, 3));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(shuffle_split(2, 0.99, 1).1.len(), 1);
    }
}
