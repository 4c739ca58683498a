use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_finite, Classifier, ClassifyError, Dataset, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    /// Project onto the ball of radius `1/sqrt(lambda)` after each step.
    pub project: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 50,
            project: true,
        }
    }
}

/// One-vs-rest linear SVM trained with Pegasos. Features are standardized
/// with training statistics; the bias is a weight on a constant 1 feature.
///
/// Steps are `1 / (1 + lambda t)` rather than `1 / (lambda t)`, so the first
/// updates are of unit size when lambda is small, and the returned weights
/// average the iterates of the second half of training.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// One row per class, `p + 1` entries with the bias last.
    weights: Vec<Vec<f64>>,
    lambda: f64,
}

impl LinearSvm {
    pub fn fit(train: &Dataset, params: &SvmParams, seed: u64) -> Result<Self> {
        check_finite(&train.x)?;
        if !(params.lambda > 0.0) || params.epochs == 0 {
            return Err(ClassifyError::InvalidArgument(format!(
                "svm needs lambda > 0 and epochs >= 1, got {} and {}",
                params.lambda, params.epochs
            )));
        }
        let counts = train.class_counts();
        if counts.iter().filter(|&&k| k > 0).count() < 2 {
            return Err(ClassifyError::SingleClass);
        }
        let (n, p) = (train.len(), train.n_features());
        let mean = train.x.column_means();
        let scale: Vec<f64> = (0..p)
            .map(|j| {
                let var = (0..n).map(|i| (train.x[(i, j)] - mean[j]).powi(2)).sum::<f64>() / n as f64;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let mut model = Self {
            mean,
            scale,
            weights: Vec::new(),
            lambda: params.lambda,
        };
        let rows: Vec<Vec<f64>> = (0..n).map(|i| model.augment(train.x.row(i))).collect();

        let radius = 1.0 / params.lambda.sqrt();
        for class in 0..train.n_classes() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(class as u64);
            let mut w = vec![0.0; p + 1];
            let mut avg = vec![0.0; p + 1];
            let mut order: Vec<usize> = (0..n).collect();
            let total = (params.epochs * n) as u64;
            let mut t = 0u64;
            for _ in 0..params.epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    t += 1;
                    let eta = 1.0 / (1.0 + params.lambda * t as f64);
                    let y = if train.labels[i] == class { 1.0 } else { -1.0 };
                    let margin = y * dot(&w, &rows[i]);
                    let shrink = 1.0 - eta * params.lambda;
                    w.iter_mut().for_each(|v| *v *= shrink);
                    if margin < 1.0 {
                        w.iter_mut().zip(&rows[i]).for_each(|(v, x)| *v += eta * y * x);
                    }
                    if params.project {
                        let norm = dot(&w, &w).sqrt();
                        if norm > radius {
                            w.iter_mut().for_each(|v| *v *= radius / norm);
                        }
                    }
                    if 2 * t > total {
                        avg.iter_mut().zip(&w).for_each(|(a, v)| *a += v);
                    }
                }
            }
            let kept = (total - total / 2) as f64;
            avg.iter_mut().for_each(|a| *a /= kept);
            model.weights.push(avg);
        }
        Ok(model)
    }

    fn augment(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .chain(std::iter::once(1.0))
            .collect()
    }

    pub fn decision_values(&self, row: &[f64]) -> Vec<f64> {
        let z = self.augment(row);
        self.weights.iter().map(|w| dot(w, &z)).collect()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// `lambda/2 |w|^2 + mean hinge loss` of one class's binary problem on `ds`.
    pub fn objective(&self, class: usize, ds: &Dataset) -> f64 {
        hinge_objective(&self.weights[class], self.lambda, ds, class, |r| self.augment(r))
    }

    /// The same objective for the all-zero weight vector (always 1).
    pub fn zero_objective(&self, class: usize, ds: &Dataset) -> f64 {
        hinge_objective(&vec![0.0; self.mean.len() + 1], self.lambda, ds, class, |r| self.augment(r))
    }
}

fn hinge_objective(w: &[f64], lambda: f64, ds: &Dataset, class: usize, augment: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let loss: f64 = (0..ds.len())
        .map(|i| {
            let y = if ds.labels[i] == class { 1.0 } else { -1.0 };
            (1.0 - y * dot(w, &augment(ds.x.row(i)))).max(0.0)
        })
        .sum();
    lambda / 2.0 * dot(w, w) + loss / ds.len() as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Classifier for LinearSvm {
    fn n_features(&self) -> usize {
        self.mean.len()
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.decision_values(row))
    }
}
