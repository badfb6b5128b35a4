//! Class prototypes: one representative series per (class, channel).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tsdata::MtsDataset;

/// Standard deviations below this are treated as constant series.
pub const ZNORM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrototypeKind {
    /// Per-time-point arithmetic mean (class centroid).
    #[default]
    Mean,
    /// Per-time-point median; the midpoint of the two central values for
    /// even class sizes.
    Median,
}

impl fmt::Display for PrototypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrototypeKind::Mean => "mean",
            PrototypeKind::Median => "median",
        })
    }
}

impl FromStr for PrototypeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(PrototypeKind::Mean),
            "median" => Ok(PrototypeKind::Median),
            other => Err(Error::UnknownPrototypeKind(other.to_string())),
        }
    }
}

/// Prototype series laid out as `[class][channel][time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    proto: Vec<f64>,
    kind: PrototypeKind,
    class_counts: Vec<usize>,
    n_channels: usize,
    length: usize,
}

impl PrototypeSet {
    /// Wraps precomputed prototypes. `proto` holds `K * C * L` values.
    pub fn from_parts(
        proto: Vec<f64>,
        kind: PrototypeKind,
        class_counts: Vec<usize>,
        n_channels: usize,
        length: usize,
    ) -> Result<Self> {
        let k = class_counts.len();
        if k < 2 {
            return Err(Error::TooFewClasses(k));
        }
        if let Some(empty) = class_counts.iter().position(|&n| n == 0) {
            return Err(Error::EmptyClass(empty));
        }
        if n_channels == 0 || length == 0 || proto.len() != k * n_channels * length {
            return Err(Error::ShapeMismatch(format!(
                "{} prototype values for {k} classes x {n_channels} channels x {length}",
                proto.len()
            )));
        }
        if proto.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue("prototype value".into()));
        }
        Ok(Self { proto, kind, class_counts, n_channels, length })
    }

    pub fn kind(&self) -> PrototypeKind {
        self.kind
    }

    pub fn n_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Prototype of class `k` on channel `c`.
    pub fn series(&self, k: usize, c: usize) -> &[f64] {
        let start = (k * self.n_channels + c) * self.length;
        &self.proto[start..start + self.length]
    }

    /// Mean absolute prototype value per channel, averaged over classes.
    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.n_channels)
            .map(|c| {
                let total: f64 = (0..self.n_classes())
                    .flat_map(|k| self.series(k, c))
                    .map(|v| v.abs())
                    .sum();
                total / (self.n_classes() * self.length) as f64
            })
            .collect()
    }
}

fn median(buf: &mut [f64]) -> f64 {
    buf.sort_unstable_by(f64::total_cmp);
    let m = buf.len() / 2;
    if buf.len() % 2 == 1 {
        buf[m]
    } else {
        buf[m - 1] + (buf[m] - buf[m - 1]) / 2.0
    }
}

/// Aggregates every class's members into one series per channel.
pub fn compute_prototypes(ds: &MtsDataset, kind: PrototypeKind) -> Result<PrototypeSet> {
    let k = ds.n_classes();
    if k < 2 {
        return Err(Error::TooFewClasses(k));
    }
    let counts = ds.class_counts();
    if let Some(empty) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(empty));
    }
    let (c, l) = (ds.n_channels(), ds.length());
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (n, &y) in ds.labels().iter().enumerate() {
        members[y].push(n);
    }
    let mut proto = vec![0.0; k * c * l];
    for (class, idx) in members.iter().enumerate() {
        for ch in 0..c {
            let out = &mut proto[(class * c + ch) * l..(class * c + ch + 1) * l];
            match kind {
                PrototypeKind::Mean => {
                    for &n in idx {
                        for (o, v) in out.iter_mut().zip(ds.series(n, ch)) {
                            *o += v;
                        }
                    }
                    let count = idx.len() as f64;
                    out.iter_mut().for_each(|o| *o /= count);
                }
                PrototypeKind::Median => {
                    let mut buf = vec![0.0; idx.len()];
                    for (t, o) in out.iter_mut().enumerate() {
                        for (b, &n) in buf.iter_mut().zip(idx) {
                            *b = ds.series(n, ch)[t];
                        }
                        *o = median(&mut buf);
                    }
                }
            }
        }
    }
    let ps = PrototypeSet { proto, kind, class_counts: counts, n_channels: c, length: l };
    log::debug!("prototype magnitudes per channel: {:?}", ps.magnitudes());
    Ok(ps)
}

/// Z-normalizes every (instance, channel) series using the population
/// standard deviation. Near-constant series become all zeros.
pub fn znormalize(ds: &MtsDataset) -> MtsDataset {
    let l = ds.length();
    let mut values = ds.values().to_vec();
    for series in values.chunks_mut(l) {
        let mean = series.iter().sum::<f64>() / l as f64;
        let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / l as f64;
        let std = var.sqrt();
        if std < ZNORM_EPS {
            series.iter_mut().for_each(|v| *v = 0.0);
        } else {
            series.iter_mut().for_each(|v| *v = (*v - mean) / std);
        }
    }
    MtsDataset::new(
        ds.name(),
        (ds.n_instances(), ds.n_channels(), l),
        values,
        ds.labels().to_vec(),
        ds.label_names().to_vec(),
        ds.channel_names().map(<[String]>::to_vec),
    )
    .expect("normalized values stay finite and shape is unchanged")
}
