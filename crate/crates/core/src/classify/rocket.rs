//! Random convolutional kernel features feeding a ridge classifier.
//!
//! Kernels follow the usual recipe: length drawn from {7, 9, 11}, standard
//! normal weights centred to zero mean, bias uniform in [-1, 1], dilation
//! `floor(2^x)` with `x` uniform in `[0, log2((L-1)/(len-1))]`, and zero
//! padding with probability one half. Channels share the kernel weights and
//! their responses are summed per time step before pooling into two features
//! per kernel: the proportion of positive values and the maximum.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::ridge::{fit_cv, Matrix, RidgeClassifier};
use super::stratified_folds;
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::tsdata::MtsDataset;

pub const KERNEL_LENGTHS: [usize; 3] = [7, 9, 11];
pub const DEFAULT_KERNELS: usize = 500;
const CV_FOLDS: usize = 5;
const STD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dilation: usize,
    pub padding: bool,
}

impl Kernel {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn pad(&self) -> usize {
        if self.padding {
            (self.len() - 1) * self.dilation / 2
        } else {
            0
        }
    }

    /// Output length for series of length `l`.
    pub fn output_len(&self, l: usize) -> usize {
        l + 2 * self.pad() - (self.len() - 1) * self.dilation
    }

    /// Convolves every channel of one instance (channel-major, each of
    /// length `l`), summing responses across channels, and returns
    /// `(ppv, max)`.
    pub fn apply(&self, instance: &[f64], l: usize, buf: &mut Vec<f64>) -> (f64, f64) {
        let pad = self.pad() as isize;
        let out_len = self.output_len(l);
        buf.clear();
        buf.resize(out_len, self.bias);
        let d = self.dilation as isize;
        for series in instance.chunks(l) {
            for (j, &w) in self.weights.iter().enumerate() {
                let offset = j as isize * d - pad;
                // Output positions whose input index lands inside the series.
                let lo = (-offset).max(0) as usize;
                let hi = ((l as isize - offset).min(out_len as isize)).max(0) as usize;
                if lo >= hi {
                    continue;
                }
                let start = (lo as isize + offset) as usize;
                for (o, x) in buf[lo..hi].iter_mut().zip(&series[start..start + hi - lo]) {
                    *o += w * x;
                }
            }
        }
        let positive = buf.iter().filter(|&&v| v > 0.0).count();
        let max = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (ppv(positive, out_len), max)
    }
}

fn ppv(positive: usize, total: usize) -> f64 {
    positive as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelBank {
    pub kernels: Vec<Kernel>,
    pub seed: u64,
    pub length: usize,
}

impl KernelBank {
    /// Samples `count` kernels for series of length `length`.
    pub fn sample(count: usize, length: usize, seed: u64) -> Result<Self> {
        if length < KERNEL_LENGTHS[0] {
            return Err(Error::TooShortSeries(length));
        }
        if count == 0 {
            return Err(Error::InvalidSpec("kernel count must be at least 1".into()));
        }
        let lengths: Vec<usize> = KERNEL_LENGTHS.iter().copied().filter(|&k| k <= length).collect();
        let mut rng = seeded(seed);
        let kernels = (0..count)
            .map(|_| {
                let len = lengths[rng.random_range(0..lengths.len())];
                let mut weights: Vec<f64> =
                    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mean = weights.iter().sum::<f64>() / len as f64;
                weights.iter_mut().for_each(|w| *w -= mean);
                let bias = rng.random_range(-1.0..=1.0);
                let max_exp = ((length - 1) as f64 / (len - 1) as f64).log2();
                let exp = if max_exp > 0.0 { rng.random_range(0.0..=max_exp) } else { 0.0 };
                let mut dilation = (2f64.powf(exp) as usize).max(1);
                while (len - 1) * dilation + 1 > length {
                    dilation -= 1;
                }
                let padding = rng.random_bool(0.5);
                Kernel { weights, bias, dilation, padding }
            })
            .collect();
        Ok(Self { kernels, seed, length })
    }

    /// `2 * count` features per instance: `[ppv_0, max_0, ppv_1, ...]`.
    pub fn transform_instance(&self, instance: &[f64]) -> Vec<f64> {
        let mut buf = Vec::with_capacity(self.length * 2);
        let mut out = Vec::with_capacity(self.kernels.len() * 2);
        for k in &self.kernels {
            let (p, m) = k.apply(instance, self.length, &mut buf);
            out.push(p);
            out.push(m);
        }
        out
    }

    pub fn transform(&self, ds: &MtsDataset) -> Matrix {
        let rows: Vec<&[f64]> = (0..ds.n_instances()).map(|n| ds.instance(n)).collect();
        self.transform_rows(&rows)
    }

    fn transform_rows(&self, rows: &[&[f64]]) -> Matrix {
        let feats: Vec<Vec<f64>> = rows.par_iter().map(|r| self.transform_instance(r)).collect();
        let cols = self.kernels.len() * 2;
        Matrix::new(rows.len(), cols, feats.concat())
    }
}

/// Per-feature standardization constants plus the ridge model on top.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedRidge {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub classifier: RidgeClassifier,
}

impl FittedRidge {
    fn standardize(&self, x: &mut Matrix) {
        for r in 0..x.rows {
            let row = &mut x.data[r * x.cols..(r + 1) * x.cols];
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocketModel {
    pub bank: KernelBank,
    pub ridge: FittedRidge,
    pub n_channels: usize,
    pub n_classes: usize,
}

/// Samples the kernel bank, standardizes the features and fits the ridge
/// classifier with its strength chosen by stratified cross-validation.
pub fn rocket_fit(ds: &MtsDataset, kernels: usize, seed: u64) -> Result<RocketModel> {
    let counts = ds.class_counts();
    if counts.iter().filter(|&&n| n > 0).count() < 2 {
        return Err(Error::SingleClass);
    }
    let bank = KernelBank::sample(kernels, ds.length(), seed)?;
    let mut x = bank.transform(ds);
    let (n, p) = (x.rows, x.cols);
    let mut mean = vec![0.0; p];
    for r in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row(r)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut std = vec![0.0; p];
    for r in 0..n {
        for ((s, v), m) in std.iter_mut().zip(x.row(r)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    std.iter_mut().for_each(|s| {
        *s = (*s / n as f64).sqrt();
        if *s < STD_EPS {
            *s = 1.0;
        }
    });
    let mut ridge = FittedRidge {
        mean,
        std,
        classifier: RidgeClassifier {
            weights: Matrix::zeros(0, 0),
            intercepts: vec![],
            lambda: 0.0,
        },
    };
    ridge.standardize(&mut x);

    let min_count = counts.iter().copied().filter(|&n| n > 0).min().unwrap_or(0);
    let folds = CV_FOLDS.min(min_count);
    let fold_ids = if folds >= 2 {
        Some(stratified_folds(ds.labels(), ds.n_classes(), folds, seed)?)
    } else {
        None
    };
    ridge.classifier = fit_cv(
        &x,
        ds.labels(),
        ds.n_classes(),
        fold_ids.as_deref().map(|f| (f, folds)),
    )?;
    Ok(RocketModel { bank, ridge, n_channels: ds.n_channels(), n_classes: ds.n_classes() })
}

impl RocketModel {
    /// Standardized features, as seen by the ridge classifier.
    pub fn features(&self, ds: &MtsDataset) -> Result<Matrix> {
        self.check_shape(ds.n_channels(), ds.length())?;
        let mut x = self.bank.transform(ds);
        self.ridge.standardize(&mut x);
        Ok(x)
    }

    fn check_shape(&self, c: usize, l: usize) -> Result<()> {
        if c != self.n_channels || l != self.bank.length {
            return Err(Error::ShapeMismatch(format!(
                "test is {c}x{l}, train is {}x{}",
                self.n_channels, self.bank.length
            )));
        }
        Ok(())
    }

    /// Predicts raw instances, each channel-major with the training shape.
    pub fn predict_rows(&self, rows: &[&[f64]]) -> Result<Vec<usize>> {
        let width = self.n_channels * self.bank.length;
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::ShapeMismatch(format!(
                "instance of {} values, expected {width}",
                bad.len()
            )));
        }
        let mut x = self.bank.transform_rows(rows);
        self.ridge.standardize(&mut x);
        Ok((0..x.rows).map(|r| self.ridge.classifier.predict(x.row(r))).collect())
    }
}

pub fn rocket_predict(model: &RocketModel, test: &MtsDataset) -> Result<Vec<usize>> {
    model.check_shape(test.n_channels(), test.length())?;
    let rows: Vec<&[f64]> = (0..test.n_instances()).map(|n| test.instance(n)).collect();
    model.predict_rows(&rows)
}
