use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifyError, Result};
use crate::stats::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub feature_names: Vec<String>,
    /// Baseline metric minus the mean permuted metric, in feature-name order.
    pub importances: Vec<f64>,
    /// Standard deviation of the drop across repeats.
    pub std: Vec<f64>,
    pub baseline: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl ImportanceReport {
    /// Feature names sorted by importance, largest first (name order breaks ties).
    pub fn ranking(&self) -> Vec<&str> {
        let mut order: Vec<usize> = (0..self.importances.len()).collect();
        order.sort_by(|&a, &b| self.importances[b].total_cmp(&self.importances[a]).then(a.cmp(&b)));
        order.into_iter().map(|i| self.feature_names[i].as_str()).collect()
    }
}

/// `baseline - metric(x with column `feature` reordered by `perm`)`.
pub fn permuted_drop<F: Fn(&Matrix) -> f64>(x: &Matrix, feature: usize, perm: &[usize], metric: &F, baseline: f64) -> f64 {
    let mut shuffled = x.clone();
    for (i, &src) in perm.iter().enumerate() {
        shuffled[(i, feature)] = x[(src, feature)];
    }
    baseline - metric(&shuffled)
}

/// Permutation importance of every column of `x` under `metric` (higher is
/// better). Each feature gets its own seeded stream of permutations.
pub fn permutation_importance<F: Fn(&Matrix) -> f64>(
    x: &Matrix,
    feature_names: &[String],
    metric: F,
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if repeats == 0 {
        return Err(ClassifyError::InvalidArgument("repeats must be at least 1".into()));
    }
    if feature_names.len() != x.cols() {
        return Err(ClassifyError::FeatureMismatch {
            expected: feature_names.len(),
            got: x.cols(),
        });
    }
    let baseline = metric(x);
    let mut importances = Vec::with_capacity(x.cols());
    let mut std = Vec::with_capacity(x.cols());
    for j in 0..x.cols() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let drops: Vec<f64> = (0..repeats)
            .map(|_| {
                let mut perm: Vec<usize> = (0..x.rows()).collect();
                perm.shuffle(&mut rng);
                permuted_drop(x, j, &perm, &metric, baseline)
            })
            .collect();
        let mean = drops.iter().sum::<f64>() / repeats as f64;
        let var = drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / repeats as f64;
        importances.push(mean);
        std.push(var.sqrt());
    }
    Ok(ImportanceReport {
        feature_names: feature_names.to_vec(),
        importances,
        std,
        baseline,
        repeats,
        seed,
    })
}

/// Coefficient of determination `1 - SSR/SST`; 0 when `truth` is constant.
pub fn r2_score(truth: &[f64], predicted: &[f64]) -> f64 {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let sst: f64 = truth.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr: f64 = truth.iter().zip(predicted).map(|(a, b)| (a - b).powi(2)).sum();
    if sst == 0.0 {
        0.0
    } else {
        1.0 - ssr / sst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{accuracy, Classifier, Dataset, DecisionTree, TreeParams};
    use rand::Rng;

    fn leaky(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<String> = (0..n).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
        let rows: Vec<[f64; 3]> = (0..n)
            .map(|i| [rng.random_range(0.0..1.0), (i % 3) as f64, rng.random_range(0.0..1.0)])
            .collect();
        let names = vec!["noise1".into(), "leak".into(), "noise2".into()];
        Dataset::new(Matrix::from_rows(&rows), &labels, names, (0..n).map(|i| i.to_string()).collect()).unwrap()
    }

    #[test]
    fn leaky_feature_dominates_and_noise_is_near_zero() {
        let train = leaky(1, 150);
        let test = leaky(2, 150);
        let m = DecisionTree::fit(&train, &TreeParams { max_depth: Some(2), min_leaf: 1 }).unwrap();
        let metric = |x: &Matrix| accuracy(&test.labels, &m.predict(x).unwrap());
        let r = permutation_importance(&test.x, &test.feature_names, metric, 20, 3).unwrap();
        assert_eq!(r.ranking()[0], "leak");
        assert!(r.importances[0].abs() <= 0.05 && r.importances[2].abs() <= 0.05, "{:?}", r.importances);
        assert!(r.importances.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn identity_permutation_contributes_nothing() {
        let d = leaky(3, 30);
        let m = DecisionTree::fit(&d, &TreeParams::default()).unwrap();
        let metric = |x: &Matrix| accuracy(&d.labels, &m.predict(x).unwrap());
        let base = metric(&d.x);
        let id: Vec<usize> = (0..30).collect();
        for j in 0..3 {
            assert_eq!(permuted_drop(&d.x, j, &id, &metric, base), 0.0);
        }
    }

    #[test]
    fn r2_cases() {
        assert_eq!(r2_score(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(r2_score(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]), 0.0);
        assert_eq!(r2_score(&[4.0, 4.0], &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn argument_checks() {
        let x = Matrix::zeros(3, 2);
        assert!(permutation_importance(&x, &["a".into(), "b".into()], |_| 0.0, 0, 1).is_err());
        assert!(matches!(
            permutation_importance(&x, &["a".into()], |_| 0.0, 1, 1),
            Err(ClassifyError::FeatureMismatch { .. })
        ));
    }
}
