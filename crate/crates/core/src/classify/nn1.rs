use crate::error::{Error, Result};
use crate::tsdata::MtsDataset;

/// One-nearest-neighbour classifier under squared Euclidean distance over
/// all channels and time points.
#[derive(Debug, Clone)]
pub struct FittedNn1 {
    train: MtsDataset,
}

pub fn nn1_fit(ds: &MtsDataset) -> FittedNn1 {
    FittedNn1 { train: ds.clone() }
}

impl FittedNn1 {
    pub fn train(&self) -> &MtsDataset {
        &self.train
    }

    /// Label of the closest training instance; ties go to the lowest index.
    pub fn predict_one(&self, instance: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for n in 0..self.train.n_instances() {
            let mut acc = 0.0;
            for (a, b) in self.train.instance(n).iter().zip(instance) {
                let d = a - b;
                acc += d * d;
                if acc >= best.0 {
                    break;
                }
            }
            if acc < best.0 {
                best = (acc, n);
            }
        }
        self.train.labels()[best.1]
    }
}

pub fn nn1_predict(m: &FittedNn1, test: &MtsDataset) -> Result<Vec<usize>> {
    if test.n_channels() != m.train.n_channels() || test.length() != m.train.length() {
        return Err(Error::ShapeMismatch(format!(
            "test is {}x{}, train is {}x{}",
            test.n_channels(),
            test.length(),
            m.train.n_channels(),
            m.train.length()
        )));
    }
    Ok((0..test.n_instances()).map(|n| m.predict_one(test.instance(n))).collect())
}
