//! Ordinary least squares with a diagnostic summary laid out like the
//! familiar `OLS Regression Results` table.

use std::fmt::Write as _;

use serde::Serialize;

use super::linalg::{jacobi_eigen, upper_triangular_inverse, back_substitute, HouseholderQr, Matrix};
use super::special::{chi2_sf, f_sf, student_t_quantile, student_t_two_sided};
use super::StatsError;

/// Diagonal entries of R below this fraction of their column norm mark a dependent column.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Intercept first, then one coefficient per regressor.
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub xtx_inverse: Matrix,
    /// `SSR / (n - p - 1)`
    pub sigma2: f64,
    pub n: usize,
    pub p: usize,
}

/// Least squares with an intercept prepended to `x` (`n x p`).
pub fn ols_fit(x: &Matrix, y: &[f64]) -> Result<OlsFit, StatsError> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(StatsError::DimensionMismatch(format!(
            "{n} design rows but {} responses",
            y.len()
        )));
    }
    if n <= p + 1 {
        return Err(StatsError::TooFewObservations { n, required: p + 2 });
    }
    let design = x.with_intercept();
    let qr = HouseholderQr::new(&design);
    if let Some(column) = qr.first_dependent_column(RANK_TOL) {
        return Err(StatsError::RankDeficient { column });
    }
    let r = qr.r();
    let qty = qr.qt_mul(y);
    let beta = back_substitute(&r, &qty[..p + 1]);
    let fitted = design.matvec(&beta);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let r_inv = upper_triangular_inverse(&r);
    let xtx_inverse = r_inv.matmul(&r_inv.transpose());
    Ok(OlsFit {
        beta,
        residuals,
        fitted,
        xtx_inverse,
        sigma2: ssr / (n - p - 1) as f64,
        n,
        p,
    })
}

/// How many parameters AIC/BIC charge for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoCriterion {
    /// Coefficients plus the error variance: `p + 2`.
    #[default]
    CountVariance,
    /// Coefficients only: `p + 1` (the statsmodels convention).
    ExcludeVariance,
}

#[derive(Debug, Clone, Default)]
pub struct SummaryOptions {
    pub dep_var: Option<String>,
    /// Regressor names (intercept excluded); defaults to `x1..xp`.
    pub names: Option<Vec<String>>,
    pub info_criterion: InfoCriterion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_err: f64,
    pub t: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionSummary {
    pub dep_var: String,
    pub coefficients: Vec<Coefficient>,
    pub r2: f64,
    pub adj_r2: f64,
    pub f_stat: f64,
    pub f_pvalue: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub info_criterion: InfoCriterion,
    pub durbin_watson: f64,
    pub jarque_bera: f64,
    pub jb_pvalue: f64,
    pub skew: f64,
    pub kurtosis: f64,
    pub condition_number: f64,
    pub n_obs: usize,
    pub df_resid: usize,
    pub df_model: usize,
    /// The response is constant, so R² and slope tests carry no information.
    pub degenerate_target: bool,
}

pub fn durbin_watson(residuals: &[f64]) -> f64 {
    let num: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let den: f64 = residuals.iter().map(|e| e * e).sum();
    num / den
}

/// Sample skewness and (non-excess) kurtosis from central moments.
pub fn skew_kurtosis(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// `n/6 · (S² + (K-3)²/4)` with its chi-square(2) p-value.
pub fn jarque_bera(values: &[f64]) -> (f64, f64, f64, f64) {
    let (s, k) = skew_kurtosis(values);
    let jb = values.len() as f64 / 6.0 * (s * s + (k - 3.0).powi(2) / 4.0);
    (jb, chi2_sf(jb, 2.0), s, k)
}

pub fn ols_summary(fit: &OlsFit, x: &Matrix, y: &[f64]) -> RegressionSummary {
    ols_summary_with(fit, x, y, &SummaryOptions::default())
}

pub fn ols_summary_with(fit: &OlsFit, x: &Matrix, y: &[f64], opts: &SummaryOptions) -> RegressionSummary {
    let (n, p) = (fit.n, fit.p);
    let k = p + 1;
    let nf = n as f64;
    let df_resid = n - k;
    let dfr = df_resid as f64;

    let mean_y = y.iter().sum::<f64>() / nf;
    let degenerate_target = y.iter().all(|&v| v == y[0]);
    let sst: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let ssr: f64 = fit.residuals.iter().map(|e| e * e).sum();
    let (r2, f_stat, f_pvalue) = if degenerate_target {
        (0.0, 0.0, 1.0)
    } else {
        let r2 = 1.0 - ssr / sst;
        let f = ((sst - ssr) / p as f64) / (ssr / dfr);
        (r2, f, f_sf(f, p as f64, dfr))
    };
    let adj_r2 = 1.0 - (1.0 - r2) * (nf - 1.0) / dfr;

    let names: Vec<String> = std::iter::once("const".to_string())
        .chain(match &opts.names {
            Some(names) => names.clone(),
            None => (1..=p).map(|j| format!("x{j}")).collect(),
        })
        .collect();
    let t_crit = student_t_quantile(0.975, dfr);
    let coefficients = (0..k)
        .map(|j| {
            let estimate = fit.beta[j];
            let std_err = (fit.sigma2 * fit.xtx_inverse[(j, j)]).sqrt();
            let (t, p_value) = if degenerate_target && j > 0 {
                (0.0, 1.0)
            } else {
                let t = estimate / std_err;
                (t, student_t_two_sided(t, dfr))
            };
            Coefficient {
                name: names.get(j).cloned().unwrap_or_else(|| format!("x{j}")),
                estimate,
                std_err,
                t,
                p_value,
                ci_low: estimate - t_crit * std_err,
                ci_high: estimate + t_crit * std_err,
            }
        })
        .collect();

    let log_likelihood = -nf / 2.0 * ((2.0 * std::f64::consts::PI).ln() + (ssr / nf).ln() + 1.0);
    let n_params = match opts.info_criterion {
        InfoCriterion::CountVariance => (k + 1) as f64,
        InfoCriterion::ExcludeVariance => k as f64,
    };
    let (jb, jb_pvalue, skew, kurtosis) = jarque_bera(&fit.residuals);

    let eig = jacobi_eigen(&x.with_intercept().gram());
    let max_eig = eig.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_eig = eig.values.iter().copied().fold(f64::INFINITY, f64::min);

    RegressionSummary {
        dep_var: opts.dep_var.clone().unwrap_or_else(|| "y".into()),
        coefficients,
        r2,
        adj_r2,
        f_stat,
        f_pvalue,
        log_likelihood,
        aic: 2.0 * n_params - 2.0 * log_likelihood,
        bic: nf.ln() * n_params - 2.0 * log_likelihood,
        info_criterion: opts.info_criterion,
        durbin_watson: durbin_watson(&fit.residuals),
        jarque_bera: jb,
        jb_pvalue,
        skew,
        kurtosis,
        condition_number: (max_eig / min_eig).sqrt(),
        n_obs: n,
        df_resid,
        df_model: p,
        degenerate_target,
    }
}

/// Four significant digits, switching to exponent form for very large or small values.
fn g4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..5).contains(&mag) {
        format!("{v:.3e}")
    } else {
        let decimals = (3 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

fn fixed(v: f64, decimals: usize) -> String {
    if v.is_finite() && v != 0.0 && (v.abs() >= 1e7 || v.abs() < 10f64.powi(-(decimals as i32))) {
        format!("{v:.3e}")
    } else {
        format!("{v:.decimals$}")
    }
}

impl RegressionSummary {
    /// Fixed-width plain-text table in the `OLS Regression Results` layout.
    pub fn render_text(&self) -> String {
        let rule = "=".repeat(78);
        let thin = "-".repeat(78);
        let mut s = String::new();
        let row = |s: &mut String, l: &str, lv: String, r: &str, rv: String| {
            let _ = writeln!(s, "{l:<20}{lv:>18}   {r:<20}{rv:>17}");
        };
        let _ = writeln!(s, "{:^78}", "OLS Regression Results");
        let _ = writeln!(s, "{rule}");
        row(&mut s, "Dep. Variable:", self.dep_var.clone(), "R-squared:", format!("{:.3}", self.r2));
        row(&mut s, "Model:", "OLS".into(), "Adj. R-squared:", format!("{:.3}", self.adj_r2));
        row(&mut s, "Method:", "Least Squares".into(), "F-statistic:", g4(self.f_stat));
        row(&mut s, "No. Observations:", self.n_obs.to_string(), "Prob (F-statistic):", fixed_p(self.f_pvalue));
        row(&mut s, "Df Residuals:", self.df_resid.to_string(), "Log-Likelihood:", format!("{:.1}", self.log_likelihood));
        row(&mut s, "Df Model:", self.df_model.to_string(), "AIC:", g4(self.aic));
        row(&mut s, "Covariance Type:", "nonrobust".into(), "BIC:", g4(self.bic));
        let _ = writeln!(s, "{rule}");
        let _ = writeln!(
            s,
            "{:<10}{:>11}{:>11}{:>11}{:>11}{:>12}{:>12}",
            "", "coef", "std err", "t", "P>|t|", "[0.025", "0.975]"
        );
        let _ = writeln!(s, "{thin}");
        for c in &self.coefficients {
            let _ = writeln!(
                s,
                "{:<10}{:>11}{:>11}{:>11}{:>11}{:>12}{:>12}",
                c.name,
                fixed(c.estimate, 4),
                fixed(c.std_err, 3),
                fixed(c.t, 3),
                format!("{:.3}", c.p_value),
                fixed(c.ci_low, 3),
                fixed(c.ci_high, 3),
            );
        }
        let _ = writeln!(s, "{rule}");
        row(&mut s, "Durbin-Watson:", format!("{:.3}", self.durbin_watson), "Jarque-Bera (JB):", format!("{:.3}", self.jarque_bera));
        row(&mut s, "Skew:", format!("{:.3}", self.skew), "Prob(JB):", fixed_p(self.jb_pvalue));
        row(&mut s, "Kurtosis:", format!("{:.3}", self.kurtosis), "Cond. No.", g4(self.condition_number));
        let _ = writeln!(s, "{rule}");
        if self.degenerate_target {
            let _ = writeln!(s, "Note: the dependent variable is constant; R-squared and slope tests are not informative.");
        }
        s
    }
}

fn fixed_p(p: f64) -> String {
    if p != 0.0 && p < 1e-3 {
        format!("{p:.2e}")
    } else {
        format!("{p:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        let x = Matrix::from_columns(&[xs]);
        let fit = ols_fit(&x, &y).unwrap();
        assert!((fit.beta[0] - 1.0).abs() < 1e-12);
        assert!((fit.beta[1] - 2.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|e| e.abs() <= 1e-10));
    }

    #[test]
    fn intercept_only_is_the_mean() {
        let y = [3.0, 5.0, 10.0, -2.0];
        let fit = ols_fit(&Matrix::zeros(4, 0), &y).unwrap();
        assert!((fit.beta[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficiency_names_column() {
        let a: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| v * 3.0).collect();
        let x = Matrix::from_columns(&[a, b]);
        let y = [1.0, 2.0, 0.0, 4.0, 3.0, 5.0];
        assert!(matches!(ols_fit(&x, &y), Err(StatsError::RankDeficient { column: 2 })));
        let ones = Matrix::from_columns(&[vec![1.0; 6]]);
        assert!(matches!(ols_fit(&ones, &y), Err(StatsError::RankDeficient { column: 1 })));
    }

    #[test]
    fn too_few_rows() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0]]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0, 3.0]),
            Err(StatsError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn durbin_watson_cases() {
        assert_eq!(durbin_watson(&[0.7; 10]), 0.0);
        for n in [2usize, 5, 10, 11] {
            let e: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            assert!((durbin_watson(&e) - 4.0 * (n as f64 - 1.0) / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_sample_moments() {
        let e: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (jb, p, s, k) = jarque_bera(&e);
        assert!(s.abs() < 1e-15);
        assert!((k - 1.0).abs() < 1e-15);
        assert!((jb - 12.0 / 6.0).abs() < 1e-12);
        assert!((p - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn constant_target() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 4.0, 3.0, 7.0]]);
        let y = [2.5; 5];
        let fit = ols_fit(&x, &y).unwrap();
        let s = ols_summary(&fit, &x, &y);
        assert!(s.degenerate_target);
        assert_eq!(s.r2, 0.0);
        assert_eq!(s.coefficients[1].t, 0.0);
        assert!(s.render_text().contains("constant"));
    }

    #[test]
    fn text_has_expected_labels() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 4.0, 3.0, 7.0, 1.5]]);
        let y = [1.0, 2.2, 3.9, 3.1, 7.4, 1.1];
        let fit = ols_fit(&x, &y).unwrap();
        let text = ols_summary(&fit, &x, &y).render_text();
        for label in [
            "R-squared",
            "Adj. R-squared",
            "F-statistic",
            "Durbin-Watson",
            "Jarque-Bera (JB)",
            "Skew",
            "Kurtosis",
            "Cond. No.",
            "P>|t|",
        ] {
            assert!(text.contains(label), "missing {label}");
        }
    }
}
