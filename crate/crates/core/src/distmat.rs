//! Channel x class-pair Euclidean distances between class prototypes.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::prototype::PrototypeSet;

/// An unordered pair of class ids, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassPair {
    pub a: usize,
    pub b: usize,
}

impl ClassPair {
    pub fn new(a: usize, b: usize) -> Option<Self> {
        (a < b).then_some(Self { a, b })
    }

    /// All pairs over `k` classes in lexicographic order.
    pub fn all(k: usize) -> Vec<ClassPair> {
        (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| ClassPair { a, b }))
            .collect()
    }
}

impl fmt::Display for ClassPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

impl FromStr for ClassPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDataset(format!("class pair key {s:?} is not \"a-b\" with a < b"));
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        let (a, b) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        ClassPair::new(a, b).ok_or_else(bad)
    }
}

/// `d[c][p]`: distance between the two prototypes of pair `p` on channel `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: Vec<f64>,
    pairs: Vec<ClassPair>,
    channel_count: usize,
}

impl DistanceMatrix {
    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn pairs(&self) -> &[ClassPair] {
        &self.pairs
    }

    pub fn get(&self, channel: usize, pair: usize) -> f64 {
        self.d[channel * self.pairs.len() + pair]
    }

    /// Distances of every pair on one channel.
    pub fn row(&self, channel: usize) -> &[f64] {
        let p = self.pairs.len();
        &self.d[channel * p..(channel + 1) * p]
    }

    /// Distances of every channel for one pair.
    pub fn column(&self, pair: usize) -> Vec<f64> {
        (0..self.channel_count).map(|c| self.get(c, pair)).collect()
    }

    /// Per-channel maximum over pairs.
    pub fn channel_max(&self) -> Vec<f64> {
        (0..self.channel_count)
            .map(|c| self.row(c).iter().copied().fold(0.0, f64::max))
            .collect()
    }

    /// CSV dump with header `channel,classA,classB,distance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,classA,classB,distance\n");
        for c in 0..self.channel_count {
            for (p, pair) in self.pairs.iter().enumerate() {
                let _ = writeln!(out, "{c},{},{},{:?}", pair.a, pair.b, self.get(c, p));
            }
        }
        out
    }
}

pub fn build_distance_matrix(ps: &PrototypeSet) -> DistanceMatrix {
    let pairs = ClassPair::all(ps.n_classes());
    let c = ps.n_channels();
    let mut d = Vec::with_capacity(c * pairs.len());
    for ch in 0..c {
        for pair in &pairs {
            let sq: f64 = ps
                .series(pair.a, ch)
                .iter()
                .zip(ps.series(pair.b, ch))
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            d.push(sq.sqrt());
        }
    }
    DistanceMatrix { d, pairs, channel_count: c }
}

/// Sum of each channel's distances, accumulated in ascending pair order.
pub fn channel_sums(dm: &DistanceMatrix) -> Vec<f64> {
    (0..dm.channel_count)
        .map(|c| dm.row(c).iter().fold(0.0, |acc, v| acc + v))
        .collect()
}
