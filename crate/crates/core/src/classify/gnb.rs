use super::{argmax, check_finite, Classifier, ClassifyError, Dataset, Result};

/// Variance floor relative to the largest per-feature variance of the training set.
const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    log_prior: Vec<f64>,
    /// `[class][feature]`
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(train: &Dataset) -> Result<Self> {
        check_finite(&train.x)?;
        let (n, p, c) = (train.len(), train.n_features(), train.n_classes());
        let counts = train.class_counts();
        if let Some(empty) = counts.iter().position(|&k| k == 0) {
            return Err(ClassifyError::EmptyClass {
                class: train.classes[empty].clone(),
            });
        }
        let mut means = vec![vec![0.0; p]; c];
        for i in 0..n {
            let l = train.labels[i];
            for (m, v) in means[l].iter_mut().zip(train.x.row(i)) {
                *m += v;
            }
        }
        for (m, &k) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= k as f64);
        }
        let mut vars = vec![vec![0.0; p]; c];
        for i in 0..n {
            let l = train.labels[i];
            for j in 0..p {
                vars[l][j] += (train.x[(i, j)] - means[l][j]).powi(2);
            }
        }
        let overall = train.x.column_means();
        let max_var = (0..p)
            .map(|j| (0..n).map(|i| (train.x[(i, j)] - overall[j]).powi(2)).sum::<f64>() / n as f64)
            .fold(0.0, f64::max);
        let floor = (VAR_FLOOR * max_var).max(1e-12);
        for (v, &k) in vars.iter_mut().zip(&counts) {
            v.iter_mut().for_each(|x| *x = (*x / k as f64).max(floor));
        }
        Ok(Self {
            log_prior: counts.iter().map(|&k| (k as f64 / n as f64).ln()).collect(),
            means,
            vars,
        })
    }

    /// Log prior plus the summed Gaussian log densities, one entry per class.
    pub fn log_joint(&self, row: &[f64]) -> Vec<f64> {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.log_prior
            .iter()
            .zip(self.means.iter().zip(&self.vars))
            .map(|(lp, (m, v))| {
                lp + row
                    .iter()
                    .zip(m.iter().zip(v))
                    .map(|(x, (mu, var))| -0.5 * (ln_2pi + var.ln()) - (x - mu).powi(2) / (2.0 * var))
                    .sum::<f64>()
            })
            .collect()
    }
}

impl Classifier for GaussianNb {
    fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.log_joint(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Matrix;

    fn ds(xs: &[f64], labels: &[&str]) -> Dataset {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let ids = (0..xs.len()).map(|i| i.to_string()).collect();
        Dataset::new(Matrix::from_vec(xs.len(), 1, xs.to_vec()), &labels, vec!["f".into()], ids).unwrap()
    }

    #[test]
    fn hand_computed_posterior() {
        let m = GaussianNb::fit(&ds(&[0.0, 2.0, 4.0, 8.0], &["A", "A", "B", "B"])).unwrap();
        // means 1 and 6, population variances 1 and 4, equal priors
        let cases = [
            (3.0, -3.612085713764618, -3.4302328943245635, 1),
            (2.5, -2.737085713764618, -3.8364828943245635, 0),
            (-1.0, -3.612085713764618, -8.430232894324563, 0),
            (10.0, -42.11208571376462, -4.305232894324563, 1),
        ];
        for (x, a, b, want) in cases {
            let lj = m.log_joint(&[x]);
            assert!((lj[0] - a).abs() < 1e-12 && (lj[1] - b).abs() < 1e-12, "{x}: {lj:?}");
            assert_eq!(m.predict_row(&[x]), want);
        }
    }

    #[test]
    fn separated_classes() {
        let m = GaussianNb::fit(&ds(&[-11.0, -10.0, -9.0, 9.0, 10.0, 11.0], &["a", "a", "a", "b", "b", "b"])).unwrap();
        assert_eq!(m.predict_row(&[-10.0]), 0);
        assert_eq!(m.predict_row(&[10.0]), 1);
        // symmetric classes: the midpoint is a tie and goes to the first label
        assert_eq!(m.predict_row(&[0.0]), 0);
    }

    #[test]
    fn constant_feature_stays_finite() {
        let m = GaussianNb::fit(&ds(&[1.0, 1.0, 1.0, 1.0], &["a", "a", "b", "b"])).unwrap();
        assert!(m.log_joint(&[1.0]).iter().all(|v| v.is_finite()));
        assert!(m.log_joint(&[5.0]).iter().all(|v| !v.is_nan()));
    }

    #[test]
    fn empty_class() {
        let full = ds(&[1.0, 2.0, 3.0], &["a", "b", "b"]);
        let only_b = full.subset(&[1, 2]);
        assert!(matches!(GaussianNb::fit(&only_b), Err(ClassifyError::EmptyClass { class }) if class == "a"));
    }
}
