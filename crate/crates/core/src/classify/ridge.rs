//! Dense ridge regression and a one-vs-rest ridge classifier.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix buffer size");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Matrix::new(idx.len(), self.cols, data)
    }
}

/// In-place Cholesky factorization of a symmetric positive definite matrix
/// (lower triangle).
fn cholesky(a: &mut Matrix) -> Result<()> {
    let n = a.rows;
    for j in 0..n {
        let mut diag = a.data[j * n + j];
        for k in 0..j {
            diag -= a.data[j * n + k] * a.data[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::ShapeMismatch("ridge system is not positive definite".into()));
        }
        let diag = diag.sqrt();
        a.data[j * n + j] = diag;
        for i in j + 1..n {
            let mut v = a.data[i * n + j];
            for k in 0..j {
                v -= a.data[i * n + k] * a.data[j * n + k];
            }
            a.data[i * n + j] = v / diag;
        }
    }
    Ok(())
}

/// Solves `L Lᵀ X = B` for every column of `b`, in place.
fn cholesky_solve(l: &Matrix, b: &mut Matrix) {
    let n = l.rows;
    let m = b.cols;
    for col in 0..m {
        for i in 0..n {
            let mut v = b.data[i * m + col];
            for k in 0..i {
                v -= l.data[i * n + k] * b.data[k * m + col];
            }
            b.data[i * m + col] = v / l.data[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = b.data[i * m + col];
            for k in i + 1..n {
                v -= l.data[k * n + i] * b.data[k * m + col];
            }
            b.data[i * m + col] = v / l.data[i * n + i];
        }
    }
}

/// Minimizes `|X W - Y|² + λ|W|²` without an intercept, i.e. returns
/// `(XᵀX + λI)⁻¹ XᵀY`. Wide problems are solved through the equivalent
/// `Xᵀ (XXᵀ + λI)⁻¹ Y`.
pub fn ridge_solve(x: &Matrix, y: &Matrix, lambda: f64) -> Result<Matrix> {
    if x.rows != y.rows {
        return Err(Error::ShapeMismatch(format!(
            "{} feature rows vs {} target rows",
            x.rows, y.rows
        )));
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidSpec(format!("ridge strength {lambda} must be positive")));
    }
    let (n, p, m) = (x.rows, x.cols, y.cols);
    if n >= p {
        let mut a = Matrix::zeros(p, p);
        for r in 0..n {
            let row = x.row(r);
            for i in 0..p {
                for j in 0..=i {
                    a.data[i * p + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..p {
            a.data[i * p + i] += lambda;
            for j in 0..i {
                a.data[j * p + i] = a.data[i * p + j];
            }
        }
        let mut b = Matrix::zeros(p, m);
        for r in 0..n {
            for i in 0..p {
                for k in 0..m {
                    b.data[i * m + k] += x.data[r * p + i] * y.data[r * m + k];
                }
            }
        }
        cholesky(&mut a)?;
        cholesky_solve(&a, &mut b);
        Ok(b)
    } else {
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum();
                g.data[i * n + j] = v;
                g.data[j * n + i] = v;
            }
            g.data[i * n + i] += lambda;
        }
        let mut alpha = y.clone();
        cholesky(&mut g)?;
        cholesky_solve(&g, &mut alpha);
        let mut w = Matrix::zeros(p, m);
        for r in 0..n {
            for i in 0..p {
                let xv = x.data[r * p + i];
                for k in 0..m {
                    w.data[i * m + k] += xv * alpha.data[r * m + k];
                }
            }
        }
        Ok(w)
    }
}

/// Linear one-vs-rest scorer: class `k` scores `x · w_k + b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeClassifier {
    /// `p x K`, column `k` is the weight vector of class `k`.
    pub weights: Matrix,
    pub intercepts: Vec<f64>,
    pub lambda: f64,
}

impl RidgeClassifier {
    /// Fits with targets +1 for the own class and −1 otherwise, centering
    /// features and targets so the intercept is not penalized.
    pub fn fit(x: &Matrix, labels: &[usize], n_classes: usize, lambda: f64) -> Result<Self> {
        let (n, p) = (x.rows, x.cols);
        let mut mean = vec![0.0; p];
        for r in 0..n {
            for (m, v) in mean.iter_mut().zip(x.row(r)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut centered = x.clone();
        for r in 0..n {
            for (v, m) in centered.data[r * p..(r + 1) * p].iter_mut().zip(&mean) {
                *v -= m;
            }
        }
        let mut targets = Matrix::new(n, n_classes, vec![-1.0; n * n_classes]);
        for (r, &y) in labels.iter().enumerate() {
            targets.data[r * n_classes + y] = 1.0;
        }
        let mut t_mean = vec![0.0; n_classes];
        for r in 0..n {
            for (m, v) in t_mean.iter_mut().zip(targets.row(r)) {
                *m += v;
            }
        }
        t_mean.iter_mut().for_each(|m| *m /= n as f64);
        for r in 0..n {
            for (v, m) in targets.data[r * n_classes..(r + 1) * n_classes].iter_mut().zip(&t_mean) {
                *v -= m;
            }
        }
        let weights = ridge_solve(&centered, &targets, lambda)?;
        let intercepts = (0..n_classes)
            .map(|k| t_mean[k] - (0..p).map(|i| mean[i] * weights.data[i * n_classes + k]).sum::<f64>())
            .collect();
        Ok(Self { weights, intercepts, lambda })
    }

    pub fn scores(&self, features: &[f64]) -> Vec<f64> {
        let k = self.intercepts.len();
        let mut out = self.intercepts.clone();
        for (i, &v) in features.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(&self.weights.data[i * k..(i + 1) * k]) {
                *o += v * w;
            }
        }
        out
    }

    /// Highest-scoring class; ties go to the lowest class id.
    pub fn predict(&self, features: &[f64]) -> usize {
        argmax(&self.scores(features))
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Regularization grid searched by cross-validation.
pub const LAMBDA_GRID: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];

/// Picks the strength with the best fold accuracy (ties to the smaller one)
/// given a fold id per row, then refits on every row.
pub fn fit_cv(
    x: &Matrix,
    labels: &[usize],
    n_classes: usize,
    folds: Option<(&[usize], usize)>,
) -> Result<RidgeClassifier> {
    let lambda = match folds {
        None => 1.0,
        Some((fold_of, k)) => {
            let mut correct = [0usize; LAMBDA_GRID.len()];
            for fold in 0..k {
                let train: Vec<usize> = (0..x.rows).filter(|&r| fold_of[r] != fold).collect();
                let test: Vec<usize> = (0..x.rows).filter(|&r| fold_of[r] == fold).collect();
                let xt = x.select_rows(&train);
                let yt: Vec<usize> = train.iter().map(|&r| labels[r]).collect();
                for (li, &lambda) in LAMBDA_GRID.iter().enumerate() {
                    let model = RidgeClassifier::fit(&xt, &yt, n_classes, lambda)?;
                    correct[li] += test
                        .iter()
                        .filter(|&&r| model.predict(x.row(r)) == labels[r])
                        .count();
                }
            }
            let mut best = 0;
            for li in 1..LAMBDA_GRID.len() {
                if correct[li] > correct[best] {
                    best = li;
                }
            }
            LAMBDA_GRID[best]
        }
    };
    RidgeClassifier::fit(x, labels, n_classes, lambda)
}
