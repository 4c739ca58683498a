//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut impl Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        m[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                m[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Least squares with intercept via the explicit inverse of the normal equations.
pub fn normal_equations_beta(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let d: Vec<Vec<f64>> = x
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let k = d[0].len();
    let xtx: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| d.iter().map(|r| r[a] * r[b]).sum()).collect())
        .collect();
    let xty: Vec<f64> = (0..k).map(|a| d.iter().zip(y).map(|(r, v)| r[a] * v).sum()).collect();
    let inv = invert(&xtx);
    inv.iter().map(|row| row.iter().zip(&xty).map(|(a, b)| a * b).sum()).collect()
}

/// Sample covariance (divisor n - 1) of row-major data.
pub fn covariance(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    let p = x[0].len();
    let mean: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    (0..p)
        .map(|a| {
            (0..p)
                .map(|b| x.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / (n - 1) as f64)
                .collect()
        })
        .collect()
}

/// Eigenvalues of a symmetric positive semidefinite matrix by power iteration
/// with Hotelling deflation, largest first.
pub fn power_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let p = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut out = Vec::with_capacity(p);
    for k in 0..p {
        let mut v: Vec<f64> = (0..p).map(|i| 1.0 + 0.1 * ((i * 7 + k * 3) % 5) as f64).collect();
        let mut lambda = 0.0;
        for _ in 0..2_000_000 {
            let w: Vec<f64> = m.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                lambda = 0.0;
                break;
            }
            let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
            let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            let mv: Vec<f64> = m.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
            lambda = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
            if delta < 1e-15 {
                break;
            }
        }
        for i in 0..p {
            for j in 0..p {
                m[i][j] -= lambda * v[i] * v[j];
            }
        }
        out.push(lambda);
    }
    out
}

/// The pinned 30x3 regression fixture and its oracle table
/// (tests/oracles/ols_summary_oracle.py).
pub mod fixture30 {
    pub const X: [[f64; 3]; 30] = [
        [-0.2112, 3.4468, -0.9252],
        [-1.7899, 5.8534, -1.1608],
        [-0.7261, 5.2956, -1.9757],
        [-0.1584, 2.8061, -0.7952],
        [0.4424, 2.2164, -1.4666],
        [-1.47, 2.6369, -0.8403],
        [0.8573, 5.6864, -0.9826],
        [-0.8674, 5.5873, -1.4078],
        [0.2396, 4.3922, -0.572],
        [0.2025, 9.1065, -1.2041],
        [0.7559, 5.6755, -0.1517],
        [-1.9621, 7.6228, -1.5118],
        [-0.8686, 4.9449, -1.7553],
        [-1.1946, 3.4834, -1.1612],
        [-1.9037, 2.3791, -1.073],
        [-0.1319, 3.0131, -1.002],
        [-0.5134, 8.5205, -1.4046],
        [0.0591, 3.5312, -0.5727],
        [-0.9715, 7.6298, -1.5977],
        [-1.367, 3.3546, -0.9539],
        [-1.521, 3.4874, -1.002],
        [-0.0356, 7.6267, -0.6079],
        [0.3328, 7.7403, -0.5301],
        [-1.1092, 11.5558, -1.0245],
        [-0.6059, 6.8004, -1.2443],
        [0.6272, 1.3958, -0.6373],
        [-1.2639, 6.1272, -1.1066],
        [-0.5015, 5.4592, -1.2877],
        [-0.7719, 6.1847, -0.0344],
        [-0.9978, 8.4655, -0.4592],
    ];
    pub const Y: [f64; 30] = [
        -1.1066, -3.7241, -0.6564, 2.3104, -0.6037, 0.062, 0.4875, -2.0083, 0.6664, -3.3585, 0.7647, -5.109,
        -2.4322, 0.6811, -1.9881, -0.8613, -2.5151, 2.3184, -4.3931, -0.6538, 1.3444, -1.3515, -1.4568,
        -3.5456, -1.7435, 0.1929, -1.5052, -0.3514, -1.4595, -1.4458,
    ];
    pub const R2: f64 = 0.6325244696365386;
    pub const ADJ_R2: f64 = 0.5901234469022931;
    pub const F_STAT: f64 = 14.917670113784187;
    pub const F_PVALUE: f64 = 7.566707620227094e-06;
    pub const LOG_LIKELIHOOD: f64 = -45.177404081557405;
    pub const AIC: f64 = 100.35480816311481;
    pub const BIC: f64 = 107.36079507142558;
    pub const AIC_EXCLUDING_VARIANCE: f64 = 98.35480816311481;
    pub const BIC_EXCLUDING_VARIANCE: f64 = 103.95959768976343;
    pub const DURBIN_WATSON: f64 = 2.259021216539169;
    pub const JARQUE_BERA: f64 = 1.4489460477521705;
    pub const JB_PVALUE: f64 = 0.4845798637006369;
    pub const SKEW: f64 = 0.2135745840877366;
    pub const KURTOSIS: f64 = 2.011718447845586;
    pub const CONDITION_NUMBER: f64 = 22.80515276934367;
    pub const SIGMA2: f64 = 1.373072206892187;
    /// (estimate, std err, t, p, ci low, ci high)
    pub const COEFS: [[f64; 6]; 4] = [
        [2.9337832165218507, 0.7047781304077821, 4.16270467249654, 0.00030551024833266595, 1.485091021756969, 4.382475411286732],
        [0.6469245856224443, 0.28830963150136196, 2.2438535343186694, 0.03357812791557919, 0.054295650627116276, 1.2395535206177724],
        [-0.44923909363791203, 0.09020146347579222, -4.980396950637906, 3.53886372914515e-05, -0.6346508572210727, -0.2638273300547513],
        [1.2281129684279009, 0.5174036182929538, 2.3736072284916716, 0.025288266680988134, 0.16457459936639451, 2.291651337489407],
    ];
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}
