//! Channel selection for multivariate time series classification.
//!
//! Each class is summarized by a prototype series per channel; channels whose
//! prototypes lie far apart across classes are kept, the rest dropped. Two
//! strategies cut the ranked channels at the elbow of their score curve:
//! ECS (sum of distances over class pairs) and ECP (union of per-pair cuts).
//! A greedy forward wrapper, two classifiers and a benchmark harness are
//! included to measure what the selection buys.

pub mod bench;
pub mod classify;
pub mod distmat;
pub mod elbow;
pub mod error;
pub mod prototype;
pub mod rng;
pub mod select;
pub mod synth;
pub mod tsdata;

pub use error::{Error, Result};
pub use tsdata::MtsDataset;
