//! Sector classifiers written from scratch, the train/test split, confusion
//! matrices and permutation importance.

mod forest;
mod gnb;
mod importance;
mod svm;
mod tree;

pub use forest::{ForestParams, RandomForest, RandomForestRegressor};
pub use gnb::GaussianNb;
pub use importance::{permutation_importance, permuted_drop, r2_score, ImportanceReport};
pub use svm::{LinearSvm, SvmParams};
pub use tree::{weighted_gini, DecisionTree, RegressionTree, TreeParams};

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("need at least 2 rows to split, got {n}")]
    TooFewRows { n: usize },
    #[error("class {class:?} has a single member and cannot be stratified")]
    ClassTooSmall { class: String },
    #[error("class {class:?} has no training rows")]
    EmptyClass { class: String },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("model expects {expected} features, data has {got}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;

/// Feature matrix with categorical labels. `classes` is sorted and fixes the
/// label order used for tie-breaking and confusion matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
    pub feature_names: Vec<String>,
    pub row_ids: Vec<String>,
}

impl Dataset {
    pub fn new(x: Matrix, labels: &[String], feature_names: Vec<String>, row_ids: Vec<String>) -> Result<Self> {
        let classes: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let ids = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label present"))
            .collect();
        Self::with_classes(x, ids, classes, feature_names, row_ids)
    }

    pub fn with_classes(
        x: Matrix,
        labels: Vec<usize>,
        classes: Vec<String>,
        feature_names: Vec<String>,
        row_ids: Vec<String>,
    ) -> Result<Self> {
        let n = x.rows();
        if labels.len() != n || row_ids.len() != n || feature_names.len() != x.cols() {
            return Err(ClassifyError::InvalidArgument(format!(
                "{n} rows x {} features but {} labels, {} ids, {} names",
                x.cols(),
                labels.len(),
                row_ids.len(),
                feature_names.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(ClassifyError::InvalidArgument(format!("label index {bad} out of range")));
        }
        check_finite(&x)?;
        Ok(Self {
            x,
            labels,
            classes,
            feature_names,
            row_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Rows in the given order; the class list is kept as is.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            feature_names: self.feature_names.clone(),
            row_ids: idx.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }
}

pub(crate) fn check_finite(x: &Matrix) -> Result<()> {
    for row in 0..x.rows() {
        if let Some(column) = x.row(row).iter().position(|v| !v.is_finite()) {
            return Err(ClassifyError::NonFinite { row, column });
        }
    }
    Ok(())
}

/// Rows go to the training side by `round(fraction * count)`, computed per
/// class when stratified. Both sides keep the original row order.
pub fn split_train_test(ds: &Dataset, train_fraction: f64, seed: u64, stratified: bool) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ClassifyError::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n = ds.len();
    if n < 2 {
        return Err(ClassifyError::TooFewRows { n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let take = |count: usize| ((train_fraction * count as f64).round() as usize).clamp(1, count - 1);
    let mut train = Vec::new();
    if stratified {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
        for (i, &l) in ds.labels.iter().enumerate() {
            groups[l].push(i);
        }
        for (c, mut g) in groups.into_iter().enumerate() {
            if g.is_empty() {
                continue;
            }
            if g.len() < 2 {
                return Err(ClassifyError::ClassTooSmall {
                    class: ds.classes[c].clone(),
                });
            }
            g.shuffle(&mut rng);
            let k = take(g.len());
            train.extend_from_slice(&g[..k]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        train.extend_from_slice(&all[..take(n)]);
    }
    train.sort_unstable();
    let mut in_train = vec![false; n];
    train.iter().for_each(|&i| in_train[i] = true);
    let test: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// A trained model that assigns class indices to feature rows.
pub trait Classifier: Sync {
    fn n_features(&self) -> usize;

    fn predict_row(&self, row: &[f64]) -> usize;

    fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        if x.cols() != self.n_features() {
            return Err(ClassifyError::FeatureMismatch {
                expected: self.n_features(),
                got: x.cols(),
            });
        }
        Ok((0..x.rows()).map(|i| self.predict_row(x.row(i))).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Gnb,
    Svm,
    Tree,
    Forest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [Self::Gnb, Self::Svm, Self::Tree, Self::Forest];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gnb => "gnb",
            Self::Svm => "svm",
            Self::Tree => "tree",
            Self::Forest => "forest",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters for the four sector classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierSuite {
    pub svm: SvmParams,
    pub tree: TreeParams,
    pub forest: ForestParams,
}

impl Default for ClassifierSuite {
    fn default() -> Self {
        Self {
            svm: SvmParams::default(),
            tree: TreeParams::default(),
            forest: ForestParams::default(),
        }
    }
}

impl ClassifierSuite {
    pub fn train(&self, kind: ClassifierKind, train: &Dataset, seed: u64) -> Result<Box<dyn Classifier + Send>> {
        Ok(match kind {
            ClassifierKind::Gnb => Box::new(GaussianNb::fit(train)?),
            ClassifierKind::Svm => Box::new(LinearSvm::fit(train, &self.svm, seed)?),
            ClassifierKind::Tree => Box::new(DecisionTree::fit(train, &self.tree)?),
            ClassifierKind::Forest => Box::new(RandomForest::fit(train, &self.forest, seed)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub kind: ClassifierKind,
    pub accuracy: f64,
    pub labels: Vec<String>,
    /// `confusion[i][j]`: rows of true class `i` predicted as `j`.
    pub confusion: Vec<Vec<usize>>,
    pub seed: u64,
}

pub fn evaluate(model: &dyn Classifier, test: &Dataset, kind: ClassifierKind, seed: u64) -> Result<ClassifierReport> {
    if test.is_empty() {
        return Err(ClassifyError::InvalidArgument("empty test set".into()));
    }
    let predicted = model.predict(&test.x)?;
    Ok(report_from_predictions(&test.labels, &predicted, &test.classes, kind, seed))
}

pub fn report_from_predictions(
    truth: &[usize],
    predicted: &[usize],
    classes: &[String],
    kind: ClassifierKind,
    seed: u64,
) -> ClassifierReport {
    let c = classes.len();
    let mut confusion = vec![vec![0usize; c]; c];
    let mut correct = 0;
    for (&t, &p) in truth.iter().zip(predicted) {
        confusion[t][p] += 1;
        correct += usize::from(t == p);
    }
    ClassifierReport {
        kind,
        accuracy: correct as f64 / truth.len() as f64,
        labels: classes.to_vec(),
        confusion,
        seed,
    }
}

pub fn accuracy(truth: &[usize], predicted: &[usize]) -> f64 {
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Share of the most common class; what always guessing it would score.
pub fn majority_baseline(truth: &[usize], n_classes: usize) -> f64 {
    let mut counts = vec![0usize; n_classes];
    truth.iter().for_each(|&l| counts[l] += 1);
    *counts.iter().max().unwrap_or(&0) as f64 / truth.len() as f64
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the largest count; the first one wins ties.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, c) in counts.iter().enumerate().skip(1) {
        if *c > counts[best] {
            best = i;
        }
    }
    best
}
