use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result, SectorMap};
use crate::classify::{
    evaluate, majority_baseline, split_train_test, ClassifierKind, ClassifierReport, ClassifierSuite, Dataset,
};
use crate::corpus::SentenceCorpus;
use crate::sgns::{train, Embedding, Hyperparams};
use crate::stats::Matrix;

/// Embedding vectors as features, sectors as labels, one row per token in
/// vocabulary order.
pub fn sector_dataset(e: &Embedding, sectors: &SectorMap) -> Result<Dataset> {
    let mut labels = Vec::with_capacity(e.len());
    for token in e.vocabulary() {
        let sector = sectors
            .get(token)
            .ok_or_else(|| PipelineError::MissingSector(token.clone()))?;
        labels.push(sector.clone());
    }
    let x = Matrix::from_vec(e.len(), e.dim(), e.vectors().to_vec());
    Ok(Dataset::new(x, &labels, e.feature_names(), e.vocabulary().to_vec())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub split_fraction: f64,
    pub epsilon: f64,
    pub classifiers: ClassifierSuite,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            split_fraction: 0.7,
            epsilon: 0.02,
            classifiers: ClassifierSuite::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub dims: Vec<usize>,
    pub classifiers: Vec<ClassifierKind>,
    /// `accuracy[i][k]`: classifier `k` at `dims[i]`.
    pub accuracy: Vec<Vec<f64>>,
    pub seed: u64,
    pub epsilon: f64,
    pub selected: usize,
    /// Share of the largest sector in the test split (the same at every dim).
    pub majority_baseline: f64,
    /// Full reports, including confusion matrices, aligned with `accuracy`.
    pub reports: Vec<Vec<ClassifierReport>>,
}

impl SweepResult {
    pub fn mean_accuracy(&self) -> Vec<f64> {
        self.accuracy
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect()
    }

    /// Reports at the selected dimension.
    pub fn selected_reports(&self) -> &[ClassifierReport] {
        let i = self.dims.iter().position(|&d| d == self.selected).expect("selected is a tested dim");
        &self.reports[i]
    }
}

/// Stratified split with `seed`, then all four classifiers trained on the
/// train side and scored on the test side.
pub fn evaluate_embedding(
    e: &Embedding,
    sectors: &SectorMap,
    opts: &SweepOptions,
    seed: u64,
) -> Result<(Vec<ClassifierReport>, f64)> {
    let ds = sector_dataset(e, sectors)?;
    let (train_set, test_set) = split_train_test(&ds, opts.split_fraction, seed, true)?;
    let mut reports = Vec::with_capacity(ClassifierKind::ALL.len());
    for kind in ClassifierKind::ALL {
        let model = opts.classifiers.train(kind, &train_set, seed)?;
        reports.push(evaluate(model.as_ref(), &test_set, kind, seed)?);
    }
    Ok((reports, majority_baseline(&test_set.labels, test_set.n_classes())))
}

/// One embedding per entry of `dims` (same corpus, seed and hyperparameters
/// apart from the dimension), each scored by [`evaluate_embedding`].
///
/// Dimensions run in parallel but every training run is single-worker, so the
/// result does not depend on the thread count.
pub fn dimension_sweep(
    corpus: &SentenceCorpus,
    dims: &[usize],
    hp: &Hyperparams,
    sectors: &SectorMap,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(PipelineError::InvalidConfig("sweep dims must be non-empty and >= 1".into()));
    }
    let runs: Vec<(Vec<ClassifierReport>, f64)> = dims
        .par_iter()
        .map(|&d| {
            let hp_d = Hyperparams {
                dimension: d,
                workers: 1,
                ..hp.clone()
            };
            let e = train(corpus, &hp_d)?;
            evaluate_embedding(&e, sectors, opts, hp.seed)
        })
        .collect::<Result<_>>()?;

    let accuracy: Vec<Vec<f64>> = runs.iter().map(|(r, _)| r.iter().map(|c| c.accuracy).collect()).collect();
    let means: Vec<f64> = accuracy.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect();
    let selected = select_dimension(dims, &means, opts.epsilon);
    Ok(SweepResult {
        dims: dims.to_vec(),
        classifiers: ClassifierKind::ALL.to_vec(),
        accuracy,
        seed: hp.seed,
        epsilon: opts.epsilon,
        selected,
        majority_baseline: runs[0].1,
        reports: runs.into_iter().map(|(r, _)| r).collect(),
    })
}

/// Smallest tested dimension whose mean accuracy is within `epsilon` of the
/// best mean accuracy.
pub fn select_dimension(dims: &[usize], mean_accuracy: &[f64], epsilon: f64) -> usize {
    assert_eq!(dims.len(), mean_accuracy.len(), "one mean per dim");
    assert!(!dims.is_empty(), "no dims tested");
    let best = mean_accuracy.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    dims.iter()
        .zip(mean_accuracy)
        .filter(|(_, &m)| m >= best - epsilon)
        .map(|(&d, _)| d)
        .min()
        .expect("the best dim always qualifies")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_rule() {
        let dims = [1, 2, 3, 4, 5, 6];
        let m = [0.30, 0.50, 0.58, 0.60, 0.605, 0.61];
        assert_eq!(select_dimension(&dims, &m, 0.02), 4);
        assert_eq!(select_dimension(&dims, &[0.4; 6], 0.02), 1);
        assert_eq!(select_dimension(&dims, &m, 1.0), 1);
        // order of testing does not matter
        assert_eq!(select_dimension(&[6, 2, 4, 1, 5, 3], &[0.61, 0.50, 0.60, 0.30, 0.605, 0.58], 0.02), 4);
    }

    #[test]
    fn missing_sector_is_named() {
        let e = Embedding::new(vec!["AAA".into(), "BBB".into()], 2, vec![0.0; 4], None);
        let sectors: SectorMap = [("AAA".to_string(), "Energy".to_string())].into_iter().collect();
        match sector_dataset(&e, &sectors) {
            Err(PipelineError::MissingSector(t)) => assert_eq!(t, "BBB"),
            other => panic!("{other:?}"),
        }
    }
}
