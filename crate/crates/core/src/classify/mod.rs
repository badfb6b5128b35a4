//! Built-in classifiers used to measure what channel selection preserves.

mod nn1;
pub mod ridge;
pub mod rocket;

pub use nn1::{nn1_fit, nn1_predict, FittedNn1};
pub use rocket::{rocket_fit, rocket_predict, Kernel, KernelBank, RocketModel};

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::select::SelectionResult;
use crate::tsdata::MtsDataset;

/// Which classifier to train; parsed from `nn1` or `rocket:<count>:<seed>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassifierSpec {
    #[default]
    Nn1,
    Rocket { kernels: usize, seed: u64 },
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::Nn1 => f.write_str("nn1"),
            ClassifierSpec::Rocket { kernels, seed } => write!(f, "rocket:{kernels}:{seed}"),
        }
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownClassifier(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["nn1"] => Ok(ClassifierSpec::Nn1),
            ["rocket", count, seed] => {
                let kernels: usize = count.parse().map_err(|_| bad())?;
                if kernels == 0 {
                    return Err(bad());
                }
                Ok(ClassifierSpec::Rocket { kernels, seed: seed.parse().map_err(|_| bad())? })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Nn1(FittedNn1),
    Rocket(Box<RocketModel>),
}

pub fn fit(spec: ClassifierSpec, ds: &MtsDataset) -> Result<Model> {
    Ok(match spec {
        ClassifierSpec::Nn1 => Model::Nn1(nn1_fit(ds)),
        ClassifierSpec::Rocket { kernels, seed } => {
            Model::Rocket(Box::new(rocket_fit(ds, kernels, seed)?))
        }
    })
}

impl Model {
    pub fn predict(&self, ds: &MtsDataset) -> Result<Vec<usize>> {
        match self {
            Model::Nn1(m) => nn1_predict(m, ds),
            Model::Rocket(m) => rocket_predict(m, ds),
        }
    }
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    correct as f64 / truth.len() as f64
}

/// Assigns each instance a fold in `0..folds`, balancing every class across
/// folds. Members of a class are shuffled with `seed` before being dealt out.
pub fn stratified_folds(
    labels: &[usize],
    n_classes: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InsufficientInstances(format!("{folds} folds; need at least 2")));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (n, &y) in labels.iter().enumerate() {
        members[y].push(n);
    }
    let mut rng = seeded(seed);
    let mut fold_of = vec![0; labels.len()];
    for (class, idx) in members.iter_mut().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < folds {
            return Err(Error::InsufficientInstances(format!(
                "class {class} has {} instances for {folds} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (pos, &n) in idx.iter().enumerate() {
            fold_of[n] = pos % folds;
        }
    }
    Ok(fold_of)
}

fn subset(ds: &MtsDataset, rows: &[usize]) -> Result<MtsDataset> {
    let mut values = Vec::with_capacity(rows.len() * ds.n_channels() * ds.length());
    for &r in rows {
        values.extend_from_slice(ds.instance(r));
    }
    MtsDataset::new(
        ds.name(),
        (rows.len(), ds.n_channels(), ds.length()),
        values,
        rows.iter().map(|&r| ds.labels()[r]).collect(),
        ds.label_names().to_vec(),
        ds.channel_names().map(<[String]>::to_vec),
    )
}

/// Mean accuracy over stratified folds, pooled as correct / total.
pub fn cross_val_accuracy(
    ds: &MtsDataset,
    spec: ClassifierSpec,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let fold_of = stratified_folds(ds.labels(), ds.n_classes(), folds, seed)?;
    let mut correct = 0;
    for fold in 0..folds {
        let train: Vec<usize> = (0..ds.n_instances()).filter(|&n| fold_of[n] != fold).collect();
        let test: Vec<usize> = (0..ds.n_instances()).filter(|&n| fold_of[n] == fold).collect();
        let model = fit(spec, &subset(ds, &train)?)?;
        let test_ds = subset(ds, &test)?;
        let preds = model.predict(&test_ds)?;
        correct += preds.iter().zip(test_ds.labels()).filter(|(p, t)| p == t).count();
    }
    Ok(correct as f64 / ds.n_instances() as f64)
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub accuracy: f64,
    pub fit_time: Duration,
    pub predict_time: Duration,
    pub predictions: Vec<usize>,
}

/// Restricts both sets to the selected channels, then fits and predicts.
/// Only fitting and prediction are timed.
pub fn evaluate(
    train: &MtsDataset,
    test: &MtsDataset,
    selection: &SelectionResult,
    spec: ClassifierSpec,
) -> Result<Evaluation> {
    if train.label_names() != test.label_names() {
        return Err(Error::ShapeMismatch("train and test declare different labels".into()));
    }
    let train = train.restrict(&selection.selected)?;
    let test = test.restrict(&selection.selected)?;
    let start = Instant::now();
    let model = fit(spec, &train)?;
    let fit_time = start.elapsed();
    let start = Instant::now();
    let predictions = model.predict(&test)?;
    let predict_time = start.elapsed();
    Ok(Evaluation {
        accuracy: accuracy(&predictions, test.labels()),
        fit_time,
        predict_time,
        predictions,
    })
}
