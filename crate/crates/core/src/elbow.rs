//! Elbow (knee) cut on a descending score curve.
//!
//! Channels are ranked by score, descending, with ties broken by ascending
//! channel index. Each rank `i` becomes the point `(i, s_i)` and the knee is
//! the point farthest from the chord joining the first and last points. The
//! cut separates the high group from the low group:
//!
//! * a knee below the chord is the first point of the low tail, so selection
//!   stops just before it;
//! * a knee above the chord is the last point of the high plateau, so it is
//!   kept.
//!
//! Curves with one or two points, flat curves and straight-line curves carry
//! no knee; every channel is then selected.
//!
//! Distances are evaluated after mapping ranks and scores onto `[0, 1]`. The
//! mapping divides every perpendicular distance by the same positive constant,
//! so the argmax is unchanged, and it makes the cut invariant under
//! `a * s + b` for any `a > 0` up to the tie tolerance below.

use crate::error::{Error, Result};

/// Normalized distances within this of the maximum count as ties.
pub const KNEE_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElbowCut {
    /// Channel indices by score descending, ties by ascending index.
    pub ranked_channels: Vec<usize>,
    /// Number of leading ranked channels kept.
    pub knee_rank: usize,
    /// `ranked_channels[..knee_rank]`.
    pub selected: Vec<usize>,
    /// 1-based rank of the point farthest from the chord, when the curve
    /// has one.
    pub elbow_point: Option<usize>,
}

/// Signed normalized offsets of each ranked point from the chord: positive
/// above it, negative below.
fn chord_offsets(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let (first, last) = (sorted[0], sorted[n - 1]);
    let range = first - last;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let along = i as f64 / (n - 1) as f64;
            let drop = (first - s) / range;
            along - drop
        })
        .collect()
}

pub fn elbow_cut(scores: &[f64]) -> Result<ElbowCut> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if let Some(c) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore(c));
    }
    let mut ranked: Vec<usize> = (0..scores.len()).collect();
    ranked.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let sorted: Vec<f64> = ranked.iter().map(|&c| scores[c]).collect();
    let n = sorted.len();

    let all = |ranked: Vec<usize>| ElbowCut {
        selected: ranked.clone(),
        knee_rank: ranked.len(),
        ranked_channels: ranked,
        elbow_point: None,
    };
    if n <= 2 || sorted[0] == sorted[n - 1] {
        return Ok(all(ranked));
    }
    let offsets = chord_offsets(&sorted);
    let peak = offsets.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if peak <= KNEE_TIE_TOL {
        return Ok(all(ranked));
    }
    let knee = offsets
        .iter()
        .position(|r| r.abs() >= peak - KNEE_TIE_TOL)
        .expect("peak is attained");
    // `knee` is 0-based and never an endpoint, whose offsets are zero.
    let knee_rank = if offsets[knee] < 0.0 { knee } else { knee + 1 };
    Ok(ElbowCut {
        selected: ranked[..knee_rank].to_vec(),
        knee_rank,
        ranked_channels: ranked,
        elbow_point: Some(knee + 1),
    })
}
