//! Small dense linear algebra: a row-major matrix, Householder QR and the
//! cyclic Jacobi eigensolver for symmetric matrices.

use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged columns");
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Panics on shape mismatch.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ self`
    pub fn gram(&self) -> Self {
        let mut g = Self::zeros(self.cols, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..self.cols {
                for j in i..self.cols {
                    g.data[i * self.cols + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..self.cols {
            for j in 0..i {
                g.data[i * self.cols + j] = g.data[j * self.cols + i];
            }
        }
        g
    }

    /// Copy with a column of ones prepended.
    pub fn with_intercept(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            out[(i, 0)] = 1.0;
            out.data[i * (self.cols + 1) + 1..(i + 1) * (self.cols + 1)].copy_from_slice(self.row(i));
        }
        out
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (m, v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= self.rows as f64);
        means
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of a thin Householder QR of an `n x k` matrix (`n >= k`).
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    /// Reflected copy of the input: R on and above the diagonal.
    qr: Matrix,
    /// Householder vectors, one per column, each of length `n - j`.
    vs: Vec<Vec<f64>>,
    column_norms: Vec<f64>,
}

impl HouseholderQr {
    pub fn new(a: &Matrix) -> Self {
        let (n, k) = (a.rows(), a.cols());
        assert!(n >= k, "QR needs at least as many rows as columns");
        let column_norms = (0..k)
            .map(|j| a.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let mut qr = a.clone();
        let mut vs = Vec::with_capacity(k);
        for j in 0..k {
            let mut v: Vec<f64> = (j..n).map(|i| qr[(i, j)]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                vs.push(vec![0.0; n - j]);
                continue;
            }
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 > 0.0 {
                for c in j..k {
                    let s: f64 = (j..n).map(|i| v[i - j] * qr[(i, c)]).sum::<f64>() * 2.0 / vnorm2;
                    for i in j..n {
                        qr[(i, c)] -= s * v[i - j];
                    }
                }
            }
            vs.push(v);
        }
        Self {
            qr,
            vs,
            column_norms,
        }
    }

    pub fn r(&self) -> Matrix {
        let k = self.qr.cols();
        let mut r = Matrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                r[(i, j)] = self.qr[(i, j)];
            }
        }
        r
    }

    /// `Qᵀ y`, full length `n`.
    pub fn qt_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = y.to_vec();
        for (j, v) in self.vs.iter().enumerate() {
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            let s: f64 = v.iter().zip(&out[j..]).map(|(a, b)| a * b).sum::<f64>() * 2.0 / vnorm2;
            for (o, vi) in out[j..].iter_mut().zip(v) {
                *o -= s * vi;
            }
        }
        out
    }

    /// First column whose diagonal entry of R is negligible relative to the
    /// column's own norm, i.e. a column (numerically) in the span of the ones before it.
    pub fn first_dependent_column(&self, rel_tol: f64) -> Option<usize> {
        (0..self.qr.cols()).find(|&j| {
            let norm = self.column_norms[j];
            norm == 0.0 || self.qr[(j, j)].abs() <= rel_tol * norm
        })
    }
}

/// Solve `R x = b` for upper-triangular `R`.
pub fn back_substitute(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let k = r.cols();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r[(i, j)] * x[j]).sum();
        x[i] = (b[i] - s) / r[(i, i)];
    }
    x
}

/// Inverse of an upper-triangular matrix.
pub fn upper_triangular_inverse(r: &Matrix) -> Matrix {
    let k = r.cols();
    let mut inv = Matrix::zeros(k, k);
    for c in 0..k {
        let mut e = vec![0.0; k];
        e[c] = 1.0;
        let col = back_substitute(r, &e);
        for (i, v) in col.into_iter().enumerate() {
            inv[(i, c)] = v;
        }
    }
    inv
}

/// Eigenpairs of a symmetric matrix; `vectors` holds eigenvectors as columns,
/// in the same (unsorted) order as `values`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi rotations until the off-diagonal norm drops below
/// `1e-12 * ‖A‖_F`.
pub fn jacobi_eigen(a: &Matrix) -> SymmetricEigen {
    let n = a.rows();
    assert_eq!(n, a.cols(), "jacobi needs a square matrix");
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut sweeps = 0;

    while sweeps < JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&m);
        if off == 0.0 || off < JACOBI_TOL * scale {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    SymmetricEigen {
        values: (0..n).map(|i| m[(i, i)]).collect(),
        vectors: v,
        sweeps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs() {
        let a = Matrix::from_rows(&[
            [1.0, 2.0, 0.5],
            [0.3, -1.0, 2.0],
            [4.0, 0.0, 1.0],
            [1.5, 1.5, -3.0],
        ]);
        let qr = HouseholderQr::new(&a);
        let r = qr.r();
        // Qᵀ A should equal R stacked over zeros
        for j in 0..3 {
            let col = qr.qt_mul(&a.column(j));
            for i in 0..4 {
                let expected = if i < 3 { r[(i, j)] } else { 0.0 };
                assert!((col[i] - expected).abs() < 1e-12);
            }
        }
        assert_eq!(qr.first_dependent_column(1e-10), None);
    }

    #[test]
    fn dependent_column_is_located() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [1.0, 0.0, 1.0], [1.0, 5.0, 6.0], [1.0, 1.0, 2.0]]);
        // column 2 = column 0 + column 1
        let qr = HouseholderQr::new(&a);
        assert_eq!(qr.first_dependent_column(1e-10), Some(2));
    }

    #[test]
    fn triangular_inverse() {
        let r = Matrix::from_rows(&[[2.0, 1.0, -1.0], [0.0, 3.0, 0.5], [0.0, 0.0, 4.0]]);
        let prod = r.matmul(&upper_triangular_inverse(&r));
        assert!(prod.max_abs_diff(&Matrix::identity(3)) < 1e-15);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = Matrix::from_rows(&[[4.0, 1.0, 2.0], [1.0, 3.0, 0.0], [2.0, 0.0, 5.0]]);
        let e = jacobi_eigen(&a);
        let lambda = {
            let mut d = Matrix::zeros(3, 3);
            for i in 0..3 {
                d[(i, i)] = e.values[i];
            }
            d
        };
        let rebuilt = e.vectors.matmul(&lambda).matmul(&e.vectors.transpose());
        assert!(rebuilt.max_abs_diff(&a) < 1e-12);
        let gram = e.vectors.transpose().matmul(&e.vectors);
        assert!(gram.max_abs_diff(&Matrix::identity(3)) < 1e-12);
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 12.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_on_diagonal_input_is_immediate() {
        let e = jacobi_eigen(&Matrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]));
        assert_eq!(e.values, [2.0, 1.0]);
        assert_eq!(e.sweeps, 0);
    }
}
