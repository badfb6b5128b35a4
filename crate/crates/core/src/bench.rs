//! Benchmark harness: what a selection saves in time and data, and what it
//! costs in accuracy.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::{evaluate, ClassifierSpec, Evaluation};
use crate::error::{Error, Result};
use crate::prototype::PrototypeKind;
use crate::rng::RNG_ALGORITHM;
use crate::select::{select, SelectConfig, SelectionResult, Strategy};
use crate::tsdata::MtsDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetShape {
    pub name: String,
    pub n_train: usize,
    pub n_test: usize,
    pub channels: usize,
    pub length: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchParams {
    pub prototype_kind: PrototypeKind,
    pub znormalize: bool,
    pub classifier: String,
    pub rng: String,
    pub threads: usize,
    pub greedy_folds: usize,
    pub greedy_patience: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub fit_ms: f64,
    pub predict_ms: f64,
    pub bytes: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub dataset: DatasetShape,
    pub strategy: Strategy,
    pub params: BenchParams,
    pub selected: Vec<usize>,
    pub selection_ms: f64,
    pub full: RunStats,
    pub reduced: RunStats,
    pub time_saved_pct: f64,
    pub storage_saved_pct: f64,
    pub seed: u64,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn accuracy_delta(&self) -> f64 {
        self.reduced.accuracy - self.full.accuracy
    }

    /// Human-readable multi-line summary.
    pub fn render_text(&self) -> String {
        let d = &self.dataset;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} ({} train / {} test, {} channels x {}, {} classes)",
            d.name, d.n_train, d.n_test, d.channels, d.length, d.classes
        );
        let _ = writeln!(
            out,
            "{} with {}: kept {}/{} channels in {:.2} ms",
            self.strategy,
            self.params.classifier,
            self.selected.len(),
            d.channels,
            self.selection_ms
        );
        for (label, run) in [("full", &self.full), ("reduced", &self.reduced)] {
            let _ = writeln!(
                out,
                "  {label:<8} fit {:>10.2} ms  predict {:>10.2} ms  {:>12} bytes  accuracy {:.4}",
                run.fit_ms, run.predict_ms, run.bytes, run.accuracy
            );
        }
        let _ = writeln!(
            out,
            "  time saved {:.1}%  storage saved {:.1}%  accuracy delta {:+.4}",
            self.time_saved_pct * 100.0,
            self.storage_saved_pct * 100.0,
            self.accuracy_delta()
        );
        out
    }
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn stats(eval: &Evaluation, bytes: usize) -> RunStats {
    RunStats {
        fit_ms: ms(eval.fit_time),
        predict_ms: ms(eval.predict_time),
        bytes,
        accuracy: eval.accuracy,
    }
}

/// Evaluates `clf` on all channels and on the channels `strategy` picks from
/// the training set alone.
pub fn run_benchmark(
    train: &MtsDataset,
    test: &MtsDataset,
    strategy: Strategy,
    config: &SelectConfig,
    clf: ClassifierSpec,
    seed: u64,
) -> Result<BenchReport> {
    run_benchmark_detailed(train, test, strategy, config, clf, seed).map(|(report, _)| report)
}

/// [`run_benchmark`], also returning the selection it evaluated.
pub fn run_benchmark_detailed(
    train: &MtsDataset,
    test: &MtsDataset,
    strategy: Strategy,
    config: &SelectConfig,
    clf: ClassifierSpec,
    seed: u64,
) -> Result<(BenchReport, SelectionResult)> {
    if train.n_channels() != test.n_channels() || train.length() != test.length() {
        return Err(Error::ShapeMismatch(format!(
            "train is {}x{}, test is {}x{}",
            train.n_channels(),
            train.length(),
            test.n_channels(),
            test.length()
        )));
    }
    let mut config = *config;
    config.params.seed = seed;
    let c = train.n_channels();
    let everything = select(train, Strategy::All, &config)?;
    let full = evaluate(train, test, &everything, clf)?;

    let selection: SelectionResult = select(train, strategy, &config)?;
    // Keeping every channel in order is the identity; reuse the full run.
    let reduced = if selection.selected == everything.selected {
        full.clone()
    } else {
        evaluate(train, test, &selection, clf)?
    };

    let bytes_full = train.byte_size();
    let bytes_sel = bytes_full / c * selection.selected.len();
    let selection_ms = ms(selection.elapsed);
    let full_stats = stats(&full, bytes_full);
    let reduced_stats = stats(&reduced, bytes_sel);
    let full_cost = full_stats.fit_ms + full_stats.predict_ms;
    let reduced_cost = selection_ms + reduced_stats.fit_ms + reduced_stats.predict_ms;
    let time_saved_pct = if full_cost > 0.0 { 1.0 - reduced_cost / full_cost } else { 0.0 };
    let report = BenchReport {
        dataset: DatasetShape {
            name: train.name().to_string(),
            n_train: train.n_instances(),
            n_test: test.n_instances(),
            channels: c,
            length: train.length(),
            classes: train.n_classes(),
        },
        strategy,
        params: BenchParams {
            prototype_kind: config.params.prototype_kind,
            znormalize: config.params.znormalize,
            classifier: clf.to_string(),
            rng: RNG_ALGORITHM.to_string(),
            threads: rayon::current_num_threads(),
            greedy_folds: config.folds,
            greedy_patience: config.patience,
        },
        selected: selection.selected.clone(),
        selection_ms,
        full: full_stats,
        reduced: reduced_stats,
        time_saved_pct,
        storage_saved_pct: 1.0 - bytes_sel as f64 / bytes_full as f64,
        seed,
    };
    Ok((report, selection))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub runs: usize,
    pub time_saved_pct: f64,
    pub storage_saved_pct: f64,
    pub accuracy_delta: f64,
}

/// Per-strategy means, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

pub fn summarize(reports: &[BenchReport]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut order: Vec<Strategy> = Vec::new();
    for r in reports {
        if !order.contains(&r.strategy) {
            order.push(r.strategy);
        }
    }
    let rows = order
        .into_iter()
        .map(|strategy| {
            let group: Vec<&BenchReport> =
                reports.iter().filter(|r| r.strategy == strategy).collect();
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&BenchReport) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            SummaryRow {
                strategy,
                runs: group.len(),
                time_saved_pct: mean(&|r| r.time_saved_pct),
                storage_saved_pct: mean(&|r| r.storage_saved_pct),
                accuracy_delta: mean(&|r| r.accuracy_delta()),
            }
        })
        .collect();
    Ok(Summary { rows })
}

impl Summary {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r.deserialize().collect::<Result<Vec<SummaryRow>, _>>()?;
        Ok(Self { rows })
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "{:<14} {:>5} {:>12} {:>15} {:>15}\n",
            "strategy", "runs", "time saved", "storage saved", "accuracy delta"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<14} {:>5} {:>11.1}% {:>14.1}% {:>+15.4}",
                r.strategy.to_string(),
                r.runs,
                r.time_saved_pct * 100.0,
                r.storage_saved_pct * 100.0,
                r.accuracy_delta
            );
        }
        out
    }
}
