//! Equal-length multivariate time series datasets and their file formats.

mod archive;
mod interchange;

pub use archive::{parse_archive, parse_archive_file, write_archive, write_archive_file};
pub use interchange::{read_csv, read_csv_files, write_csv, write_csv_files};

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Bytes per stored value; sizes are accounted canonically as 64-bit reals.
pub const BYTES_PER_VALUE: usize = 8;

/// N labeled instances of C channels by L time points.
///
/// Values are stored instance-major, then channel, then time, so the series
/// of instance `n` on channel `c` is one contiguous slice. A dataset is
/// immutable once built; every constructor validates all invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct MtsDataset {
    name: String,
    n_instances: usize,
    n_channels: usize,
    length: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    label_names: Vec<String>,
    channel_names: Option<Vec<String>>,
}

fn check_token(kind: &str, token: &str) -> Result<()> {
    if token.is_empty() {
        return Err(Error::InvalidDataset(format!("empty {kind}")));
    }
    if token.chars().any(|ch| ch.is_whitespace() || ch == ':' || ch == ',') {
        return Err(Error::InvalidDataset(format!(
            "{kind} {token:?} contains whitespace, ':' or ','"
        )));
    }
    Ok(())
}

impl MtsDataset {
    /// Builds a dataset from a flat `[instance][channel][time]` buffer.
    pub fn new(
        name: impl Into<String>,
        (n_instances, n_channels, length): (usize, usize, usize),
        values: Vec<f64>,
        labels: Vec<usize>,
        label_names: Vec<String>,
        channel_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let name = name.into();
        check_token("dataset name", &name)?;
        if n_instances == 0 || n_channels == 0 || length == 0 {
            return Err(Error::InvalidDataset(format!(
                "shape ({n_instances}, {n_channels}, {length}) has an empty axis"
            )));
        }
        if values.len() != n_instances * n_channels * length {
            return Err(Error::RaggedData(format!(
                "{} values for shape ({n_instances}, {n_channels}, {length})",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let per = n_channels * length;
            return Err(Error::NonFiniteValue(format!(
                "instance {} channel {} time {}",
                pos / per,
                (pos % per) / length,
                pos % length
            )));
        }
        if labels.len() != n_instances {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {n_instances} instances",
                labels.len()
            )));
        }
        if label_names.is_empty() {
            return Err(Error::InvalidDataset("no class labels declared".into()));
        }
        let mut seen = HashSet::new();
        for l in &label_names {
            check_token("label", l)?;
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidDataset(format!("label {l:?} declared twice")));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= label_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label id {bad} outside 0..{}",
                label_names.len()
            )));
        }
        if let Some(names) = &channel_names {
            if names.len() != n_channels {
                return Err(Error::InvalidDataset(format!(
                    "{} channel names for {n_channels} channels",
                    names.len()
                )));
            }
            for c in names {
                check_token("channel name", c)?;
            }
        }
        Ok(Self {
            name,
            n_instances,
            n_channels,
            length,
            values,
            labels,
            label_names,
            channel_names,
        })
    }

    /// Builds a dataset from nested `[instance][channel][time]` vectors.
    pub fn from_nested(
        name: impl Into<String>,
        instances: &[Vec<Vec<f64>>],
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let n = instances.len();
        let c = instances.first().map_or(0, Vec::len);
        let l = instances
            .first()
            .and_then(|inst| inst.first())
            .map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * c * l);
        for (i, inst) in instances.iter().enumerate() {
            if inst.len() != c {
                return Err(Error::RaggedData(format!(
                    "instance {i} has {} channels, expected {c}",
                    inst.len()
                )));
            }
            for (ch, series) in inst.iter().enumerate() {
                if series.len() != l {
                    return Err(Error::RaggedData(format!(
                        "instance {i} channel {ch} has length {}, expected {l}",
                        series.len()
                    )));
                }
                values.extend_from_slice(series);
            }
        }
        Self::new(name, (n, c, l), values, labels, label_names, None)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_instances(&self) -> usize {
        self.n_instances
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of declared classes (K).
    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    /// Explicit channel names, if the source provided them.
    pub fn channel_names(&self) -> Option<&[String]> {
        self.channel_names.as_deref()
    }

    /// Name of channel `c`, falling back to `ch{c}`.
    pub fn channel_name(&self, c: usize) -> String {
        match &self.channel_names {
            Some(names) => names[c].clone(),
            None => format!("ch{c}"),
        }
    }

    /// The series of instance `n` on channel `c`.
    pub fn series(&self, n: usize, c: usize) -> &[f64] {
        let start = (n * self.n_channels + c) * self.length;
        &self.values[start..start + self.length]
    }

    /// All channels of instance `n`, channel-major.
    pub fn instance(&self, n: usize) -> &[f64] {
        let per = self.n_channels * self.length;
        &self.values[n * per..(n + 1) * per]
    }

    /// Instance count per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Same values under a new label assignment over the same vocabulary.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::new(
            self.name.clone(),
            (self.n_instances, self.n_channels, self.length),
            self.values.clone(),
            labels,
            self.label_names.clone(),
            self.channel_names.clone(),
        )
    }

    /// Applies `f` to every value; the result is revalidated.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.name.clone(),
            (self.n_instances, self.n_channels, self.length),
            self.values.iter().map(|&v| f(v)).collect(),
            self.labels.clone(),
            self.label_names.clone(),
            self.channel_names.clone(),
        )
    }

    /// Keeps only `channels`, in the given order.
    pub fn restrict(&self, channels: &[usize]) -> Result<Self> {
        ChannelSubsetView::new(self, channels.to_vec())?.materialize()
    }

    /// Canonical in-memory size: 8 bytes per value.
    pub fn byte_size(&self) -> usize {
        BYTES_PER_VALUE * self.n_instances * self.n_channels * self.length
    }
}

/// A validated choice of channels over a borrowed dataset.
#[derive(Debug, Clone)]
pub struct ChannelSubsetView<'a> {
    base: &'a MtsDataset,
    channels: Vec<usize>,
}

impl<'a> ChannelSubsetView<'a> {
    pub fn new(base: &'a MtsDataset, channels: Vec<usize>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut seen = vec![false; base.n_channels];
        for &c in &channels {
            if c >= base.n_channels {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    channels: base.n_channels,
                });
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::DuplicateChannel(c));
            }
        }
        Ok(Self { base, channels })
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    pub fn materialize(&self) -> Result<MtsDataset> {
        let base = self.base;
        let mut values =
            Vec::with_capacity(base.n_instances * self.channels.len() * base.length);
        for n in 0..base.n_instances {
            for &c in &self.channels {
                values.extend_from_slice(base.series(n, c));
            }
        }
        let channel_names = base
            .channel_names
            .as_ref()
            .map(|names| self.channels.iter().map(|&c| names[c].clone()).collect());
        MtsDataset::new(
            base.name.clone(),
            (base.n_instances, self.channels.len(), base.length),
            values,
            base.labels.clone(),
            base.label_names.clone(),
            channel_names,
        )
    }
}
