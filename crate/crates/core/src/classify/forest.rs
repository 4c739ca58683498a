use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, normalized, ClassTask, Grow, RegTask, Task, Tree, TreeParams};
use super::{check_finite, majority, Classifier, ClassifyError, Dataset, Result};
use crate::stats::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features examined per split; `None` means `ceil(sqrt(p))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            bootstrap: true,
            tree: TreeParams::default(),
        }
    }
}

impl ForestParams {
    fn features_per_split(&self, p: usize) -> Result<usize> {
        if self.n_trees == 0 {
            return Err(ClassifyError::InvalidArgument("forest needs at least one tree".into()));
        }
        let k = self.max_features.unwrap_or_else(|| (p as f64).sqrt().ceil() as usize);
        if k == 0 {
            return Err(ClassifyError::InvalidArgument("max_features must be positive".into()));
        }
        Ok(k.min(p))
    }
}

/// One seed per tree, drawn from the master seed, so results do not depend on scheduling.
fn tree_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random()).collect()
}

fn grow_forest<T, F>(x: &Matrix, n: usize, params: &ForestParams, seed: u64, task: F) -> Result<Vec<Tree<T::Out>>>
where
    T: Task,
    T::Out: Send,
    F: Fn() -> T + Sync,
{
    let k = params.features_per_split(x.cols())?;
    if params.tree.min_leaf == 0 || n < params.tree.min_leaf {
        return Err(ClassifyError::InvalidArgument(format!(
            "min_leaf {} with {n} rows",
            params.tree.min_leaf
        )));
    }
    Ok(tree_seeds(seed, params.n_trees)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let g = Grow {
                params: &params.tree,
                max_features: Some(k),
                rng: Some(&mut rng),
            };
            grow(&task(), x, idx, g)
        })
        .collect())
}

fn mean_importance<O: Copy>(trees: &[Tree<O>], p: usize) -> Vec<f64> {
    let mut acc = vec![0.0; p];
    for t in trees {
        for (a, v) in acc.iter_mut().zip(normalized(t.raw_importance())) {
            *a += v;
        }
    }
    normalized(&acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<Tree<usize>>,
    n_classes: usize,
    n_features: usize,
}

impl RandomForest {
    pub fn fit(train: &Dataset, params: &ForestParams, seed: u64) -> Result<Self> {
        check_finite(&train.x)?;
        let n_classes = train.n_classes();
        let trees = grow_forest(&train.x, train.len(), params, seed, || ClassTask {
            labels: &train.labels,
            n_classes,
        })?;
        Ok(Self {
            trees,
            n_classes,
            n_features: train.n_features(),
        })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn feature_importances(&self) -> Vec<f64> {
        mean_importance(&self.trees, self.n_features)
    }
}

impl Classifier for RandomForest {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(row)] += 1;
        }
        majority(&votes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForestRegressor {
    trees: Vec<Tree<f64>>,
    n_features: usize,
}

impl RandomForestRegressor {
    pub fn fit(x: &Matrix, y: &[f64], params: &ForestParams, seed: u64) -> Result<Self> {
        check_finite(x)?;
        if y.len() != x.rows() {
            return Err(ClassifyError::InvalidArgument(format!("{} rows but {} targets", x.rows(), y.len())));
        }
        let trees = grow_forest(x, y.len(), params, seed, || RegTask { y })?;
        Ok(Self {
            trees,
            n_features: x.cols(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features {
            return Err(ClassifyError::FeatureMismatch {
                expected: self.n_features,
                got: x.cols(),
            });
        }
        Ok((0..x.rows()).map(|i| self.predict_row(x.row(i))).collect())
    }

    pub fn feature_importances(&self) -> Vec<f64> {
        mean_importance(&self.trees, self.n_features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{accuracy, split_train_test, DecisionTree, RegressionTree};

    fn noisy(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let r: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let score = r[0] + 0.7 * r[1] - 0.5 * r[2] + rng.random_range(-0.4..0.4);
            labels.push(if score > 0.3 {
                "hi"
            } else if score < -0.3 {
                "lo"
            } else {
                "mid"
            }
            .to_string());
            rows.push(r);
        }
        let names = (1..=5).map(|j| format!("f{j}")).collect();
        let ids = (0..n).map(|i| i.to_string()).collect();
        Dataset::new(Matrix::from_rows(&rows), &labels, names, ids).unwrap()
    }

    #[test]
    fn degenerate_forest_is_a_tree() {
        let d = noisy(1, 120);
        let params = ForestParams {
            n_trees: 1,
            max_features: Some(5),
            bootstrap: false,
            tree: TreeParams::default(),
        };
        let f = RandomForest::fit(&d, &params, 99).unwrap();
        let t = DecisionTree::fit(&d, &TreeParams::default()).unwrap();
        let probe = noisy(2, 200);
        assert_eq!(f.predict(&probe.x).unwrap(), t.predict(&probe.x).unwrap());

        let y: Vec<f64> = (0..d.len()).map(|i| d.x[(i, 0)] * 2.0 + d.x[(i, 3)]).collect();
        let fr = RandomForestRegressor::fit(&d.x, &y, &params, 5).unwrap();
        let tr = RegressionTree::fit(&d.x, &y, &TreeParams::default()).unwrap();
        assert_eq!(fr.predict(&probe.x).unwrap(), tr.predict(&probe.x));
    }

    #[test]
    fn same_seed_same_forest() {
        let d = noisy(3, 100);
        let p = ForestParams { n_trees: 15, ..Default::default() };
        assert_eq!(RandomForest::fit(&d, &p, 4).unwrap(), RandomForest::fit(&d, &p, 4).unwrap());
        assert_ne!(RandomForest::fit(&d, &p, 4).unwrap(), RandomForest::fit(&d, &p, 5).unwrap());
    }

    #[test]
    fn forest_is_no_worse_than_a_tree() {
        let (mut forest_acc, mut tree_acc) = (0.0, 0.0);
        for seed in 0..10 {
            let d = noisy(100 + seed, 300);
            let (tr, te) = split_train_test(&d, 0.7, seed, true).unwrap();
            let f = RandomForest::fit(&tr, &ForestParams { n_trees: 50, ..Default::default() }, seed).unwrap();
            let t = DecisionTree::fit(&tr, &TreeParams::default()).unwrap();
            forest_acc += accuracy(&te.labels, &f.predict(&te.x).unwrap()) / 10.0;
            tree_acc += accuracy(&te.labels, &t.predict(&te.x).unwrap()) / 10.0;
        }
        assert!(forest_acc >= tree_acc - 0.05, "forest {forest_acc} tree {tree_acc}");
    }

    #[test]
    fn importance_sums_to_one() {
        let d = noisy(7, 150);
        let f = RandomForest::fit(&d, &ForestParams { n_trees: 20, ..Default::default() }, 1).unwrap();
        let imp = f.feature_importances();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(imp[0] > imp[4]);
    }

    #[test]
    fn feature_mismatch() {
        let d = noisy(8, 30);
        let f = RandomForest::fit(&d, &ForestParams { n_trees: 3, ..Default::default() }, 1).unwrap();
        let bad = Matrix::zeros(2, 3);
        assert!(matches!(f.predict(&bad), Err(ClassifyError::FeatureMismatch { expected: 5, got: 3 })));
    }
}
