//! Synthetic many-channel datasets with a known set of informative channels.
//!
//! Noise channels are i.i.d. Gaussian. On an informative channel `c`, class
//! `y` carries `effect * sin(2π f t / L + φ)` with `f = 1 + y + (c mod 3)` and
//! `φ = y π / K`, plus the same Gaussian noise. Class means therefore differ
//! only on informative channels.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded, Rng};
use crate::tsdata::MtsDataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub channels: usize,
    pub informative: usize,
    pub classes: usize,
    /// Instances per class, in train and in test.
    pub per_class: usize,
    pub length: usize,
    pub noise_sigma: f64,
    pub effect: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            channels: 120,
            informative: 5,
            classes: 3,
            per_class: 20,
            length: 100,
            noise_sigma: 1.0,
            effect: 1.5,
            seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.channels == 0 || self.informative == 0 || self.informative > self.channels {
            return bad(format!(
                "need 1 <= informative ({}) <= channels ({})",
                self.informative, self.channels
            ));
        }
        if self.classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.classes));
        }
        if self.per_class == 0 || self.length == 0 {
            return bad("per-class count and length must be positive".into());
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return bad(format!("noise sigma {} must be finite and >= 0", self.noise_sigma));
        }
        if !self.effect.is_finite() {
            return bad(format!("effect {} must be finite", self.effect));
        }
        Ok(())
    }

    /// Noise-free class signal on channel `c` at time `t`.
    pub fn signal(&self, class: usize, c: usize, t: usize) -> f64 {
        let freq = (1 + class + c % 3) as f64;
        let phase = class as f64 * PI / self.classes as f64;
        self.effect * (2.0 * PI * freq * t as f64 / self.length as f64 + phase).sin()
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub train: MtsDataset,
    pub test: MtsDataset,
    /// Informative channel indices, ascending.
    pub informative: Vec<usize>,
}

fn draw(spec: &SynthSpec, name: &str, is_informative: &[bool], rng: &mut Rng) -> Result<MtsDataset> {
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::InvalidSpec(format!("noise: {e}")))?;
    let (c, l) = (spec.channels, spec.length);
    let n = spec.classes * spec.per_class;
    let mut values = Vec::with_capacity(n * c * l);
    let mut labels = Vec::with_capacity(n);
    for class in 0..spec.classes {
        for _ in 0..spec.per_class {
            for (ch, &informative) in is_informative.iter().enumerate() {
                for t in 0..l {
                    let base = if informative { spec.signal(class, ch, t) } else { 0.0 };
                    values.push(base + noise.sample(rng));
                }
            }
            labels.push(class);
        }
    }
    let label_names = (0..spec.classes).map(|k| format!("class{k}")).collect();
    MtsDataset::new(name, (n, c, l), values, labels, label_names, None)
}

/// Draws train then test from one seeded stream.
pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let mut order: Vec<usize> = (0..spec.channels).collect();
    order.shuffle(&mut rng);
    let mut informative = order[..spec.informative].to_vec();
    informative.sort_unstable();
    let mut mask = vec![false; spec.channels];
    for &c in &informative {
        mask[c] = true;
    }
    let train = draw(spec, "synth", &mask, &mut rng)?;
    let test = draw(spec, "synth", &mask, &mut rng)?;
    Ok(SynthData { train, test, informative })
}

/// Ground truth document written next to generated archives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub informative: Vec<usize>,
    pub spec: SynthSpec,
}
