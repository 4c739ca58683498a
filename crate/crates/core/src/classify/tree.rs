use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_finite, majority, Classifier, ClassifyError, Dataset, Result};
use crate::stats::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf: 1,
        }
    }
}

impl TreeParams {
    fn validate(&self, n: usize) -> Result<()> {
        if self.min_leaf == 0 || n < self.min_leaf {
            return Err(ClassifyError::InvalidArgument(format!(
                "min_leaf {} with {n} rows",
                self.min_leaf
            )));
        }
        Ok(())
    }
}

/// Gini impurity of a node from its class counts.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Size-weighted Gini impurity of a two-way split.
pub fn weighted_gini(left: &[usize], right: &[usize]) -> f64 {
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let n = (nl + nr) as f64;
    (nl as f64 * gini(left) + nr as f64 * gini(right)) / n
}

#[derive(Debug, Clone, PartialEq)]
enum Node<O> {
    Leaf(O),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tree<O> {
    nodes: Vec<Node<O>>,
    n_features: usize,
    /// Total impurity decrease per feature, weighted by node share of the rows.
    importance: Vec<f64>,
}

impl<O: Copy> Tree<O> {
    pub(crate) fn predict(&self, row: &[f64]) -> O {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(o) => return *o,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub(crate) fn raw_importance(&self) -> &[f64] {
        &self.importance
    }

    pub(crate) fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

/// Normalize to a unit sum; all zeros stay zeros.
pub(crate) fn normalized(v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter().map(|x| x / total).collect()
    } else {
        vec![0.0; v.len()]
    }
}

/// Split criterion and leaf value for one kind of target.
pub(crate) trait Task {
    type Stats: Clone;
    type Out: Copy;
    fn empty(&self) -> Self::Stats;
    fn add(&self, s: &mut Self::Stats, i: usize);
    fn remove(&self, s: &mut Self::Stats, i: usize);
    fn impurity(&self, s: &Self::Stats) -> f64;
    fn is_pure(&self, s: &Self::Stats) -> bool;
    fn leaf(&self, s: &Self::Stats) -> Self::Out;
}

pub(crate) struct ClassTask<'a> {
    pub labels: &'a [usize],
    pub n_classes: usize,
}

impl Task for ClassTask<'_> {
    type Stats = Vec<usize>;
    type Out = usize;

    fn empty(&self) -> Vec<usize> {
        vec![0; self.n_classes]
    }
    fn add(&self, s: &mut Vec<usize>, i: usize) {
        s[self.labels[i]] += 1;
    }
    fn remove(&self, s: &mut Vec<usize>, i: usize) {
        s[self.labels[i]] -= 1;
    }
    fn impurity(&self, s: &Vec<usize>) -> f64 {
        gini(s)
    }
    fn is_pure(&self, s: &Vec<usize>) -> bool {
        s.iter().filter(|&&c| c > 0).count() <= 1
    }
    fn leaf(&self, s: &Vec<usize>) -> usize {
        majority(s)
    }
}

pub(crate) struct RegTask<'a> {
    pub y: &'a [f64],
}

#[derive(Clone)]
pub(crate) struct Moments {
    n: usize,
    sum: f64,
    sumsq: f64,
    min: f64,
    max: f64,
}

impl Task for RegTask<'_> {
    type Stats = Moments;
    type Out = f64;

    fn empty(&self) -> Moments {
        Moments {
            n: 0,
            sum: 0.0,
            sumsq: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
    fn add(&self, s: &mut Moments, i: usize) {
        let v = self.y[i];
        s.n += 1;
        s.sum += v;
        s.sumsq += v * v;
        s.min = s.min.min(v);
        s.max = s.max.max(v);
    }
    // min/max are only consulted on whole nodes, never on the shrinking side
    fn remove(&self, s: &mut Moments, i: usize) {
        let v = self.y[i];
        s.n -= 1;
        s.sum -= v;
        s.sumsq -= v * v;
    }
    fn impurity(&self, s: &Moments) -> f64 {
        if s.n == 0 {
            return 0.0;
        }
        let m = s.sum / s.n as f64;
        (s.sumsq / s.n as f64 - m * m).max(0.0)
    }
    fn is_pure(&self, s: &Moments) -> bool {
        s.min == s.max
    }
    fn leaf(&self, s: &Moments) -> f64 {
        s.sum / s.n as f64
    }
}

/// How many features each split may look at; `None` means all of them.
pub(crate) struct Grow<'a, R> {
    pub params: &'a TreeParams,
    pub max_features: Option<usize>,
    pub rng: Option<&'a mut R>,
}

pub(crate) fn grow<T: Task, R: Rng>(task: &T, x: &Matrix, mut idx: Vec<usize>, mut g: Grow<'_, R>) -> Tree<T::Out> {
    let mut tree = Tree {
        nodes: Vec::new(),
        n_features: x.cols(),
        importance: vec![0.0; x.cols()],
    };
    let total = idx.len() as f64;
    build(task, x, &mut idx, 0, total, &mut g, &mut tree);
    tree
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

fn build<T: Task, R: Rng>(
    task: &T,
    x: &Matrix,
    idx: &mut [usize],
    depth: usize,
    total: f64,
    g: &mut Grow<'_, R>,
    tree: &mut Tree<T::Out>,
) -> usize {
    let mut stats = task.empty();
    idx.iter().for_each(|&i| task.add(&mut stats, i));
    let n = idx.len();
    let id = tree.nodes.len();
    tree.nodes.push(Node::Leaf(task.leaf(&stats)));

    let min_leaf = g.params.min_leaf;
    if task.is_pure(&stats) || n < 2 * min_leaf || g.params.max_depth.is_some_and(|d| depth >= d) {
        return id;
    }

    let p = x.cols();
    let features: Vec<usize> = match (g.max_features, g.rng.as_deref_mut()) {
        (Some(k), Some(rng)) if k < p => {
            let mut f = rand::seq::index::sample(rng, p, k).into_vec();
            f.sort_unstable();
            f
        }
        _ => (0..p).collect(),
    };

    let parent = task.impurity(&stats);
    let mut best: Option<Best> = None;
    let mut order = idx.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| x[(a, f)].total_cmp(&x[(b, f)]).then(a.cmp(&b)));
        let mut left = task.empty();
        let mut right = stats.clone();
        for k in 0..n - 1 {
            task.add(&mut left, order[k]);
            task.remove(&mut right, order[k]);
            let (a, b) = (x[(order[k], f)], x[(order[k + 1], f)]);
            if a == b || k + 1 < min_leaf || n - k - 1 < min_leaf {
                continue;
            }
            let score = ((k + 1) as f64 * task.impurity(&left) + (n - k - 1) as f64 * task.impurity(&right)) / n as f64;
            if best.as_ref().is_none_or(|bst| score < bst.score) {
                let mid = a + (b - a) / 2.0;
                best = Some(Best {
                    score,
                    feature: f,
                    threshold: if mid < b { mid } else { a },
                });
            }
        }
    }
    let Some(best) = best else { return id };

    tree.importance[best.feature] += n as f64 / total * (parent - best.score).max(0.0);
    let (f, thr) = (best.feature, best.threshold);
    // stable partition keeps row order inside each child
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[(i, f)] <= thr);
    let split = l.len();
    idx[..split].copy_from_slice(&l);
    idx[split..].copy_from_slice(&r);
    let (li, ri) = idx.split_at_mut(split);
    let left = build(task, x, li, depth + 1, total, g, tree);
    let right = build(task, x, ri, depth + 1, total, g, tree);
    tree.nodes[id] = Node::Split {
        feature: f,
        threshold: thr,
        left,
        right,
    };
    id
}

/// CART classification tree on Gini impurity.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) tree: Tree<usize>,
}

impl DecisionTree {
    pub fn fit(train: &Dataset, params: &TreeParams) -> Result<Self> {
        check_finite(&train.x)?;
        params.validate(train.len())?;
        let task = ClassTask {
            labels: &train.labels,
            n_classes: train.n_classes(),
        };
        let g = Grow::<rand_chacha::ChaCha8Rng> {
            params,
            max_features: None,
            rng: None,
        };
        Ok(Self {
            tree: grow(&task, &train.x, (0..train.len()).collect(), g),
        })
    }

    /// Impurity decrease per feature, normalized to sum to 1.
    pub fn feature_importances(&self) -> Vec<f64> {
        normalized(self.tree.raw_importance())
    }

    pub fn n_leaves(&self) -> usize {
        self.tree.n_leaves()
    }
}

impl Classifier for DecisionTree {
    fn n_features(&self) -> usize {
        self.tree.n_features
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        self.tree.predict(row)
    }
}

/// CART regression tree on within-node variance.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub(crate) tree: Tree<f64>,
}

impl RegressionTree {
    pub fn fit(x: &Matrix, y: &[f64], params: &TreeParams) -> Result<Self> {
        check_finite(x)?;
        if y.len() != x.rows() {
            return Err(ClassifyError::InvalidArgument(format!("{} rows but {} targets", x.rows(), y.len())));
        }
        params.validate(y.len())?;
        let g = Grow::<rand_chacha::ChaCha8Rng> {
            params,
            max_features: None,
            rng: None,
        };
        Ok(Self {
            tree: grow(&RegTask { y }, x, (0..y.len()).collect(), g),
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.tree.predict(row)
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }

    pub fn feature_importances(&self) -> Vec<f64> {
        normalized(self.tree.raw_importance())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[[f64; 2]], labels: &[&str]) -> Dataset {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Dataset::new(Matrix::from_rows(rows), &labels, vec!["a".into(), "b".into()], ids).unwrap()
    }

    #[test]
    fn weighted_gini_by_hand() {
        assert!((weighted_gini(&[2, 2], &[4, 0]) - 0.25).abs() < 1e-15);
        assert_eq!(gini(&[3, 0]), 0.0);
        assert!((gini(&[1, 1]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_input_is_one_leaf() {
        let d = ds(&[[0.0, 1.0], [2.0, 3.0], [5.0, 1.0]], &["x", "x", "x"]);
        let t = DecisionTree::fit(&d, &TreeParams::default()).unwrap();
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(t.predict(&d.x).unwrap(), d.labels);
    }

    #[test]
    fn xor_needs_depth_two() {
        let d = ds(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], &["a", "b", "b", "a"]);
        let t = DecisionTree::fit(&d, &TreeParams { max_depth: Some(2), min_leaf: 1 }).unwrap();
        assert_eq!(t.predict(&d.x).unwrap(), d.labels);
        let stump = DecisionTree::fit(&d, &TreeParams { max_depth: Some(1), min_leaf: 1 }).unwrap();
        assert!(stump.predict(&d.x).unwrap() != d.labels);
    }

    #[test]
    fn ties_prefer_lower_feature_and_threshold() {
        // both features separate perfectly; feature 0 must be chosen
        let d = ds(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]], &["a", "a", "b", "b"]);
        let t = DecisionTree::fit(&d, &TreeParams::default()).unwrap();
        match &t.tree.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 1.5);
            }
            Node::Leaf(_) => panic!("expected a split"),
        }
        assert_eq!(t.feature_importances(), vec![1.0, 0.0]);
    }

    #[test]
    fn majority_leaf_ties_take_first_label() {
        let d = ds(&[[0.0, 0.0], [0.0, 0.0]], &["b", "a"]);
        let t = DecisionTree::fit(&d, &TreeParams::default()).unwrap();
        assert_eq!(t.predict_row(&[0.0, 0.0]), 0);
    }

    #[test]
    fn regression_tree_fits_steps() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]]);
        let y = [1.0, 1.0, 1.0, 5.0, 5.0, 9.0];
        let t = RegressionTree::fit(&x, &y, &TreeParams::default()).unwrap();
        assert_eq!(t.predict(&x), y.to_vec());
        let stump = RegressionTree::fit(&x, &y, &TreeParams { max_depth: Some(1), min_leaf: 1 }).unwrap();
        assert_eq!(stump.predict_row(&[0.0]), 1.0);
        assert!((stump.predict_row(&[5.0]) - 19.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_leaf_is_respected() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0], [4.0]]);
        let y = [0.0, 0.0, 0.0, 0.0, 10.0];
        let t = RegressionTree::fit(&x, &y, &TreeParams { max_depth: None, min_leaf: 2 }).unwrap();
        // the lone outlier cannot be isolated
        assert!(t.predict_row(&[4.0]) < 10.0);
    }
}
