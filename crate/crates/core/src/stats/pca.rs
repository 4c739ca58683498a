use serde::Serialize;

use super::linalg::{jacobi_eigen, Matrix};
use super::StatsError;

#[derive(Debug, Clone, Serialize)]
pub struct PcaResult {
    /// `p x p`, columns are principal directions in descending eigenvalue order.
    #[serde(skip)]
    pub components: Matrix,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Column means removed before projection (zeros when not centering).
    pub mean: Vec<f64>,
}

impl PcaResult {
    /// Scores of `x` on the first `m` components.
    pub fn transform(&self, x: &Matrix, m: usize) -> Matrix {
        let p = self.components.rows();
        assert_eq!(x.cols(), p, "feature count");
        assert!(m <= p);
        let mut out = Matrix::zeros(x.rows(), m);
        for i in 0..x.rows() {
            let row = x.row(i);
            for c in 0..m {
                out[(i, c)] = (0..p)
                    .map(|j| (row[j] - self.mean[j]) * self.components[(j, c)])
                    .sum();
            }
        }
        out
    }
}

/// Principal components from the sample covariance (divisor `n - 1`).
///
/// With `center == false` the second-moment matrix of the raw columns is
/// decomposed instead.
pub fn pca(x: &Matrix, center: bool) -> Result<PcaResult, StatsError> {
    let (n, p) = (x.rows(), x.cols());
    if n < 2 || p < 1 {
        return Err(StatsError::TooFewObservations { n, required: 2 });
    }
    let mean = if center { x.column_means() } else { vec![0.0; p] };
    let mut centered = x.clone();
    for i in 0..n {
        for j in 0..p {
            centered[(i, j)] -= mean[j];
        }
    }
    let mut cov = centered.gram();
    for v in 0..p {
        for w in 0..p {
            cov[(v, w)] /= (n - 1) as f64;
        }
    }

    let eig = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]).then(a.cmp(&b)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.values[i].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(StatsError::DegenerateInput("zero total variance".into()));
    }

    let mut components = Matrix::zeros(p, p);
    for (c, &src) in order.iter().enumerate() {
        let mut col = eig.vectors.column(src);
        // deterministic sign: the largest-magnitude loading is positive
        let pivot = col
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > col[best].abs() { i } else { best });
        if col[pivot] < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        for (r, v) in col.into_iter().enumerate() {
            components[(r, c)] = v;
        }
    }

    Ok(PcaResult {
        components,
        explained_variance_ratio: eigenvalues.iter().map(|e| e / total).collect(),
        eigenvalues,
        mean,
    })
}

/// Sum of the first `m` explained-variance ratios.
pub fn cumulative_variance(r: &PcaResult, m: usize) -> Result<f64, StatsError> {
    let p = r.explained_variance_ratio.len();
    if m < 1 || m > p {
        return Err(StatsError::IndexOutOfRange { index: m, len: p });
    }
    Ok(r.explained_variance_ratio[..m].iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_covariance_ratios() {
        // columns with variances 2 and 1, uncorrelated
        let s2 = 2f64.sqrt();
        let x = Matrix::from_rows(&[[s2, 1.0], [-s2, 1.0], [s2, -1.0], [-s2, -1.0]]);
        let r = pca(&x, true).unwrap();
        // sample variances with n-1: 8/3 and 4/3
        assert!((r.eigenvalues[0] - 8.0 / 3.0).abs() < 1e-12);
        assert!((r.explained_variance_ratio[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.explained_variance_ratio[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn points_on_a_line() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [-3.0, -3.0], [0.5, 0.5]]);
        let r = pca(&x, true).unwrap();
        assert!((r.explained_variance_ratio[0] - 1.0).abs() < 1e-10);
        assert!(r.explained_variance_ratio[1].abs() < 1e-10);
    }

    #[test]
    fn cumulative() {
        let r = PcaResult {
            components: Matrix::identity(3),
            eigenvalues: vec![6.0, 3.0, 1.0],
            explained_variance_ratio: vec![0.6, 0.3, 0.1],
            mean: vec![0.0; 3],
        };
        assert!((cumulative_variance(&r, 2).unwrap() - 0.9).abs() < 1e-15);
        assert!((cumulative_variance(&r, 3).unwrap() - 1.0).abs() < 1e-10);
        assert!(matches!(cumulative_variance(&r, 0), Err(StatsError::IndexOutOfRange { .. })));
        assert!(matches!(cumulative_variance(&r, 4), Err(StatsError::IndexOutOfRange { .. })));
    }

    #[test]
    fn constant_input_is_degenerate() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]);
        assert!(matches!(pca(&x, true), Err(StatsError::DegenerateInput(_))));
    }
}
