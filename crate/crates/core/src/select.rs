//! Channel selection strategies.
//!
//! * **ECS** ranks channels by the sum of their prototype distances over all
//!   class pairs and keeps the channels above the elbow.
//! * **ECP** cuts every class pair's distance column at its own elbow and
//!   keeps the union. A channel that separates only one pair is kept, so
//!   noisy channels can slip in through a single pair.
//! * **GreedyForward** is the wrapper baseline: add the channel with the best
//!   cross-validated accuracy until accuracy stops improving.
//! * **All** keeps every channel.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classify::{cross_val_accuracy, ClassifierSpec};
use crate::distmat::{build_distance_matrix, channel_sums, ClassPair, DistanceMatrix};
use crate::elbow::elbow_cut;
use crate::error::{Error, Result};
use crate::prototype::{compute_prototypes, znormalize, PrototypeKind};
use crate::tsdata::MtsDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "ECS")]
    Ecs,
    #[serde(rename = "ECP")]
    Ecp,
    GreedyForward,
    All,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ecs" => Ok(Strategy::Ecs),
            "ecp" => Ok(Strategy::Ecp),
            "greedy" | "greedyforward" => Ok(Strategy::GreedyForward),
            "all" => Ok(Strategy::All),
            _ => Err(Error::UnknownStrategy(s.to_string())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Ecs => "ECS",
            Strategy::Ecp => "ECP",
            Strategy::GreedyForward => "GreedyForward",
            Strategy::All => "All",
        })
    }
}

/// Configuration echoed into every result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub prototype_kind: PrototypeKind,
    pub znormalize: bool,
    pub seed: u64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self { prototype_kind: PrototypeKind::Mean, znormalize: false, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectConfig {
    pub params: SelectionParams,
    /// Classifier scored by the greedy baseline.
    pub classifier: ClassifierSpec,
    pub folds: usize,
    pub patience: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            params: SelectionParams::default(),
            classifier: ClassifierSpec::Nn1,
            folds: 5,
            patience: 1,
        }
    }
}

/// Per-pair ECP cuts, serialized as a map keyed `"a-b"` in pair order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCuts(pub Vec<(ClassPair, Vec<usize>)>);

impl Serialize for PairCuts {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (pair, chans) in &self.0 {
            map.serialize_entry(&pair.to_string(), chans)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for PairCuts {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CutsVisitor;
        impl<'de> Visitor<'de> for CutsVisitor {
            type Value = PairCuts;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from \"a-b\" class pairs to channel lists")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<PairCuts, A::Error> {
                let mut out = Vec::new();
                while let Some((key, chans)) = access.next_entry::<String, Vec<usize>>()? {
                    let pair = key.parse().map_err(serde::de::Error::custom)?;
                    out.push((pair, chans));
                }
                Ok(PairCuts(out))
            }
        }
        deserializer.deserialize_map(CutsVisitor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub strategy: Strategy,
    /// Selected channels, ascending.
    pub selected: Vec<usize>,
    /// Diagnostic score per channel: ECS sums, ECP max over pairs, greedy
    /// accuracy at the round a channel joined, zero for All.
    pub scores: Vec<f64>,
    pub per_pair_cuts: PairCuts,
    pub elapsed: Duration,
    pub params: SelectionParams,
}

#[derive(Serialize, Deserialize)]
struct SelectionJson {
    strategy: Strategy,
    selected: Vec<usize>,
    scores: Vec<f64>,
    per_pair_cuts: PairCuts,
    elapsed_ms: f64,
    params: SelectionParams,
}

impl Serialize for SelectionResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SelectionJson {
            strategy: self.strategy,
            selected: self.selected.clone(),
            scores: self.scores.clone(),
            per_pair_cuts: self.per_pair_cuts.clone(),
            elapsed_ms: self.elapsed.as_secs_f64() * 1e3,
            params: self.params,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SelectionResult {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let j = SelectionJson::deserialize(deserializer)?;
        if !j.elapsed_ms.is_finite() || j.elapsed_ms < 0.0 {
            return Err(serde::de::Error::custom("elapsed_ms must be a non-negative number"));
        }
        Ok(SelectionResult {
            strategy: j.strategy,
            selected: j.selected,
            scores: j.scores,
            per_pair_cuts: j.per_pair_cuts,
            elapsed: Duration::from_secs_f64(j.elapsed_ms / 1e3),
            params: j.params,
        })
    }
}

impl SelectionResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("selection results always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn distance_matrix(ds: &MtsDataset, kind: PrototypeKind) -> Result<DistanceMatrix> {
    Ok(build_distance_matrix(&compute_prototypes(ds, kind)?))
}

/// Elbow Class Sum.
pub fn ecs_select(ds: &MtsDataset, kind: PrototypeKind) -> Result<SelectionResult> {
    let start = Instant::now();
    let dm = distance_matrix(ds, kind)?;
    let scores = channel_sums(&dm);
    let mut selected = elbow_cut(&scores)?.selected;
    selected.sort_unstable();
    Ok(SelectionResult {
        strategy: Strategy::Ecs,
        selected,
        scores,
        per_pair_cuts: PairCuts::default(),
        elapsed: start.elapsed(),
        params: SelectionParams { prototype_kind: kind, ..Default::default() },
    })
}

/// Elbow Class Pairwise.
pub fn ecp_select(ds: &MtsDataset, kind: PrototypeKind) -> Result<SelectionResult> {
    let start = Instant::now();
    let dm = distance_matrix(ds, kind)?;
    let mut keep = vec![false; dm.channel_count()];
    let mut cuts = Vec::with_capacity(dm.pairs().len());
    for (p, &pair) in dm.pairs().iter().enumerate() {
        let mut chans = elbow_cut(&dm.column(p))?.selected;
        chans.sort_unstable();
        for &c in &chans {
            keep[c] = true;
        }
        cuts.push((pair, chans));
    }
    let selected = (0..keep.len()).filter(|&c| keep[c]).collect();
    Ok(SelectionResult {
        strategy: Strategy::Ecp,
        selected,
        scores: dm.channel_max(),
        per_pair_cuts: PairCuts(cuts),
        elapsed: start.elapsed(),
        params: SelectionParams { prototype_kind: kind, ..Default::default() },
    })
}

/// Greedy forward wrapper around cross-validated accuracy. Stops once
/// `patience + 1` consecutive rounds fail to beat the best accuracy, or when
/// every channel is in; returns the best subset seen.
pub fn greedy_forward_select(
    ds: &MtsDataset,
    clf: ClassifierSpec,
    folds: usize,
    patience: usize,
    seed: u64,
) -> Result<SelectionResult> {
    let start = Instant::now();
    let counts = ds.class_counts();
    if counts.len() < 2 {
        return Err(Error::TooFewClasses(counts.len()));
    }
    if folds < 2 {
        return Err(Error::InsufficientInstances(format!("{folds} folds; need at least 2")));
    }
    if let Some((class, &n)) = counts.iter().enumerate().find(|(_, &n)| n < folds) {
        return Err(Error::InsufficientInstances(format!(
            "class {class} has {n} instances for {folds} folds"
        )));
    }
    let c = ds.n_channels();
    let mut current: Vec<usize> = Vec::new();
    let mut used = vec![false; c];
    let mut scores = vec![0.0; c];
    let mut best: Option<(f64, usize)> = None;
    let mut stale = 0;
    while current.len() < c {
        let candidates: Vec<usize> = (0..c).filter(|&ch| !used[ch]).collect();
        let accs: Vec<f64> = candidates
            .par_iter()
            .map(|&ch| {
                let mut trial = current.clone();
                trial.push(ch);
                cross_val_accuracy(&ds.restrict(&trial)?, clf, folds, seed)
            })
            .collect::<Result<_>>()?;
        let mut pick = 0;
        for i in 1..accs.len() {
            if accs[i] > accs[pick] {
                pick = i;
            }
        }
        let (ch, acc) = (candidates[pick], accs[pick]);
        log::debug!("greedy round {}: channel {ch} -> {acc}", current.len() + 1);
        current.push(ch);
        used[ch] = true;
        scores[ch] = acc;
        if best.is_none_or(|(b, _)| acc > b) {
            best = Some((acc, current.len()));
            stale = 0;
        } else {
            stale += 1;
            if stale > patience {
                break;
            }
        }
    }
    let (_, len) = best.expect("at least one round runs");
    let mut selected = current[..len].to_vec();
    selected.sort_unstable();
    Ok(SelectionResult {
        strategy: Strategy::GreedyForward,
        selected,
        scores,
        per_pair_cuts: PairCuts::default(),
        elapsed: start.elapsed(),
        params: SelectionParams { seed, ..Default::default() },
    })
}

/// Runs `strategy` under `config`, z-normalizing first when asked.
pub fn select(ds: &MtsDataset, strategy: Strategy, config: &SelectConfig) -> Result<SelectionResult> {
    let start = Instant::now();
    let normalized;
    let ds = if config.params.znormalize {
        normalized = znormalize(ds);
        &normalized
    } else {
        ds
    };
    let kind = config.params.prototype_kind;
    let mut result = match strategy {
        Strategy::Ecs => ecs_select(ds, kind)?,
        Strategy::Ecp => ecp_select(ds, kind)?,
        Strategy::GreedyForward => greedy_forward_select(
            ds,
            config.classifier,
            config.folds,
            config.patience,
            config.params.seed,
        )?,
        Strategy::All => SelectionResult {
            strategy: Strategy::All,
            selected: (0..ds.n_channels()).collect(),
            scores: vec![0.0; ds.n_channels()],
            per_pair_cuts: PairCuts::default(),
            elapsed: Duration::ZERO,
            params: SelectionParams::default(),
        },
    };
    result.params = config.params;
    if strategy != Strategy::All {
        result.elapsed = start.elapsed();
    }
    Ok(result)
}

/// Parses a strategy token and dispatches.
pub fn select_by_name(ds: &MtsDataset, token: &str, config: &SelectConfig) -> Result<SelectionResult> {
    select(ds, token.parse()?, config)
}
