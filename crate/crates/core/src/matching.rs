//! Shift-tolerant code distances and the nearest-neighbour decision.
//!
//! Shift convention: at shift `s`, feature `j` of every segment of `a` is
//! compared with feature `(j + s) mod L` of the same segment of `b`. If `b`
//! is `a` rotated right by 3 columns, the best shift is `+3`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureCode, IrisTemplate};
use crate::normalization::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub max_shift: usize,
    pub k: usize,
    pub a: usize,
    /// Acceptance threshold for verification on the normalised distance.
    #[serde(rename = "tau")]
    pub verify_threshold: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            max_shift: 4,
            k: 5,
            a: 3,
            verify_threshold: 0.6,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.a == 0 || self.a > self.k {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("need 1 <= a <= k, got a={} k={}", self.a, self.k),
            });
        }
        if !(self.verify_threshold >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "verify_threshold",
                reason: format!("must be non-negative, got {}", self.verify_threshold),
            });
        }
        Ok(())
    }
}

/// Best alignment between two codes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftScore {
    pub d_min: f64,
    pub best_shift: isize,
}

/// A [`ShiftScore`] against one gallery entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchScore {
    pub gallery_ref: usize,
    pub label: String,
    pub d_min: f64,
    pub best_shift: isize,
}

/// Unnormalised L1 distance.
pub fn abs_distance(a: &[u8], b: &[u8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| u32::from(x.abs_diff(y))).sum::<u32>() as f64)
}

/// Normalised distance at one shift.
pub fn shifted_distance(a: &FeatureCode, b: &FeatureCode, shift: isize) -> Result<f64> {
    check_compatible(a, b)?;
    Ok(shifted_sum(a, b, shift) as f64 / a.len() as f64)
}

fn check_compatible(a: &FeatureCode, b: &FeatureCode) -> Result<()> {
    if a.len() != b.len() || a.segment_len != b.segment_len {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

fn shifted_sum(a: &FeatureCode, b: &FeatureCode, shift: isize) -> u32 {
    let n = a.segment_len;
    let s = shift.rem_euclid(n as isize) as usize;
    let mut total = 0u32;
    for (sa, sb) in a.levels.chunks(n).zip(b.levels.chunks(n)) {
        // b[(j + s) mod n] for j in 0..n is b[s..] followed by b[..s].
        let (tail, head) = sb.split_at(s);
        let rotated = head.iter().chain(tail);
        total += sa.iter().zip(rotated).map(|(&x, &y)| u32::from(x.abs_diff(y))).sum::<u32>();
    }
    total
}

/// Shifts in search order: 0, -1, +1, -2, +2, ...
fn shift_order(max_shift: usize) -> impl Iterator<Item = isize> {
    std::iter::once(0).chain((1..=max_shift as isize).flat_map(|s| [-s, s]))
}

/// Minimum normalised distance over circular shifts in `[-max_shift,
/// max_shift]`; ties keep the earliest shift in the order 0, -1, +1, ...
pub fn semi_correlation_codes(a: &FeatureCode, b: &FeatureCode, max_shift: usize) -> Result<ShiftScore> {
    check_compatible(a, b)?;
    let mut best = (u32::MAX, 0isize);
    for s in shift_order(max_shift) {
        let d = shifted_sum(a, b, s);
        if d < best.0 {
            best = (d, s);
        }
    }
    Ok(ShiftScore {
        d_min: best.0 as f64 / a.len() as f64,
        best_shift: best.1,
    })
}

pub fn semi_correlation(a: &IrisTemplate, b: &IrisTemplate, max_shift: usize) -> Result<ShiftScore> {
    semi_correlation_codes(&a.code(), &b.code(), max_shift)
}

/// Full 2-D cross-correlation. Entry `(i, j)` is
/// `Σ A(m, n)·B(m + i - (Ma-1), n + j - (Na-1))` with out-of-range `B`
/// read as zero, so the output is `(Ma+Mb-1) × (Na+Nb-1)` and covers every
/// relative offset.
pub fn cross_correlation(a: &Matrix, b: &Matrix) -> Matrix {
    let (ma, na, mb, nb) = (a.rows(), a.cols(), b.rows(), b.cols());
    if ma == 0 || na == 0 || mb == 0 || nb == 0 {
        return Matrix::zeros(0, 0);
    }
    let mut out = Matrix::zeros(ma + mb - 1, na + nb - 1);
    for m in 0..ma {
        for n in 0..na {
            let v = a.get(m, n);
            if v == 0.0 {
                continue;
            }
            // B(p, q) contributes to (p + ma-1 - m, q + na-1 - n).
            for p in 0..mb {
                for q in 0..nb {
                    let (i, j) = (p + ma - 1 - m, q + na - 1 - n);
                    out.set(i, j, out.get(i, j) + v * b.get(p, q));
                }
            }
        }
    }
    out
}

/// Peak of the cross-correlation normalised by the energies of both inputs
/// (1 for identical non-zero matrices).
pub fn correlation_similarity(a: &Matrix, b: &Matrix) -> f64 {
    let ea: f64 = a.as_slice().iter().map(|v| v * v).sum();
    let eb: f64 = b.as_slice().iter().map(|v| v * v).sum();
    if ea == 0.0 || eb == 0.0 {
        return 0.0;
    }
    let c = cross_correlation(a, b);
    c.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max) / (ea * eb).sqrt()
}

/// Nearest-neighbour vote: among the `k` closest scores, the most frequent
/// label with at least `a` votes wins (frequency ties go to the label with
/// the smaller best distance); without such a label, the single nearest
/// neighbour decides. Distance ties keep input order.
pub fn aknn_decide<L: Clone + PartialEq>(scores: &[(L, f64)], k: usize, a: usize) -> Result<L> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&x, &y| scores[x].1.total_cmp(&scores[y].1));
    let top = &order[..k.min(order.len()).max(1)];
    // Distinct labels in order of first appearance, i.e. by best distance.
    let mut counts: Vec<(&L, usize)> = Vec::new();
    for &i in top {
        let label = &scores[i].0;
        match counts.iter_mut().find(|(l, _)| *l == label) {
            Some(entry) => entry.1 += 1,
            None => counts.push((label, 1)),
        }
    }
    let mut winner: Option<(&L, usize)> = None;
    for &(label, count) in &counts {
        if count >= a && winner.is_none_or(|(_, c)| count > c) {
            winner = Some((label, count));
        }
    }
    Ok(winner.map(|(l, _)| l.clone()).unwrap_or_else(|| scores[order[0]].0.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub label: String,
    /// Best score among gallery entries carrying the decided label.
    pub score: MatchScore,
    /// The `k` nearest entries, closest first.
    pub top: Vec<MatchScore>,
}

/// Scores a probe against every gallery entry, in gallery order.
pub fn score_gallery(probe: &FeatureCode, gallery: &[(String, FeatureCode)], max_shift: usize) -> Result<Vec<MatchScore>> {
    gallery
        .par_iter()
        .enumerate()
        .map(|(i, (label, code))| {
            let s = semi_correlation_codes(probe, code, max_shift)?;
            Ok(MatchScore {
                gallery_ref: i,
                label: label.clone(),
                d_min: s.d_min,
                best_shift: s.best_shift,
            })
        })
        .collect()
}

/// Decision from precomputed scores (which must be in gallery order).
pub fn decide(scores: Vec<MatchScore>, cfg: &MatchConfig) -> Result<Identification> {
    if scores.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let pairs: Vec<(String, f64)> = scores.iter().map(|s| (s.label.clone(), s.d_min)).collect();
    let label = aknn_decide(&pairs, cfg.k, cfg.a)?;
    let mut sorted = scores;
    sorted.sort_by(|x, y| x.d_min.total_cmp(&y.d_min));
    let score = sorted.iter().find(|s| s.label == label).cloned().expect("label present");
    sorted.truncate(cfg.k.max(1));
    Ok(Identification { label, score, top: sorted })
}

pub fn identify_code(probe: &FeatureCode, gallery: &[(String, FeatureCode)], cfg: &MatchConfig) -> Result<Identification> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    decide(score_gallery(probe, gallery, cfg.max_shift)?, cfg)
}

/// Label used for a gallery template without a subject id.
fn label_of(t: &IrisTemplate, i: usize) -> String {
    t.subject_id.clone().unwrap_or_else(|| format!("#{i}"))
}

pub fn identify(probe: &IrisTemplate, gallery: &[IrisTemplate], cfg: &MatchConfig) -> Result<Identification> {
    let codes: Vec<(String, FeatureCode)> = gallery
        .iter()
        .enumerate()
        .map(|(i, t)| (label_of(t, i), t.code()))
        .collect();
    identify_code(&probe.code(), &codes, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub accept: bool,
    pub d_min: f64,
    pub best_shift: isize,
}

/// Accepts iff the closest claimed template lies within `tau`.
pub fn verify(probe: &IrisTemplate, claimed: &[IrisTemplate], tau: f64, max_shift: usize) -> Result<Verification> {
    let mut best: Option<ShiftScore> = None;
    for t in claimed {
        let s = semi_correlation(probe, t, max_shift)?;
        if best.is_none_or(|b| s.d_min < b.d_min) {
            best = Some(s);
        }
    }
    let best = best.ok_or(Error::EmptyGallery)?;
    Ok(Verification {
        accept: best.d_min <= tau,
        d_min: best.d_min,
        best_shift: best.best_shift,
    })
}

/// JSON-serialisable outcome of one identification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub probe: String,
    pub decision: String,
    pub d_min: f64,
    pub best_shift: isize,
    pub top: Vec<MatchScore>,
}

impl MatchReport {
    pub fn new(probe: impl Into<String>, id: &Identification) -> Self {
        Self {
            probe: probe.into(),
            decision: id.label.clone(),
            d_min: id.score.d_min,
            best_shift: id.score.best_shift,
            top: id.top.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(levels: Vec<u8>) -> IrisTemplate {
        IrisTemplate::new(levels).unwrap()
    }

    fn pseudo_levels(seed: u32) -> Vec<u8> {
        (0..320u32).map(|i| ((i.wrapping_mul(2654435761).wrapping_add(seed * 97)) >> 7) as u8 % 4).collect()
    }

    fn roll_halves(levels: &[u8], s: isize) -> Vec<u8> {
        let mut out = Vec::new();
        for half in levels.chunks(160) {
            out.extend((0..160).map(|j| half[(j as isize - s).rem_euclid(160) as usize]));
        }
        out
    }

    #[test]
    fn abs_distance_examples() {
        assert_eq!(abs_distance(&[1, 2, 3], &[3, 2, 1]).unwrap(), 4.0);
        assert_eq!(abs_distance(&[1, 2], &[1, 2]).unwrap(), 0.0);
        assert!(matches!(abs_distance(&[1], &[1, 2]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn self_match() {
        let a = template(pseudo_levels(1));
        let s = semi_correlation(&a, &a, 4).unwrap();
        assert_eq!(s, ShiftScore { d_min: 0.0, best_shift: 0 });
    }

    #[test]
    fn rotated_copy_aligns() {
        let a = template(pseudo_levels(2));
        let b = template(roll_halves(a.levels(), 3));
        let s = semi_correlation(&a, &b, 4).unwrap();
        assert_eq!(s, ShiftScore { d_min: 0.0, best_shift: 3 });
        let s = semi_correlation(&b, &a, 4).unwrap();
        assert_eq!(s, ShiftScore { d_min: 0.0, best_shift: -3 });
    }

    #[test]
    fn cross_correlation_examples() {
        let a = Matrix::from_vec(1, 1, vec![2.0]).unwrap();
        let b = Matrix::from_vec(1, 1, vec![3.0]).unwrap();
        assert_eq!(cross_correlation(&a, &b).as_slice(), &[6.0]);

        let imp = Matrix::from_fn(3, 3, |r, c| if (r, c) == (1, 2) { 1.0 } else { 0.0 });
        let b = Matrix::from_fn(2, 4, |r, c| (r * 4 + c + 1) as f64);
        let c = cross_correlation(&imp, &b);
        assert_eq!((c.rows(), c.cols()), (4, 6));
        // Impulse at (1, 2) of a 3×3 places B at offset (3-1-1, 3-1-2) = (1, 0).
        for i in 0..4 {
            for j in 0..6 {
                let expected = if (1..3).contains(&i) && j < 4 { b.get(i - 1, j) } else { 0.0 };
                assert_eq!(c.get(i, j), expected);
            }
        }
        assert!((correlation_similarity(&b, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aknn_examples() {
        let s = |labels: &[&'static str]| -> Vec<(&'static str, f64)> {
            labels.iter().enumerate().map(|(i, l)| (*l, i as f64)).collect()
        };
        assert_eq!(aknn_decide(&s(&["x", "x", "y", "x", "z"]), 5, 3).unwrap(), "x");
        assert_eq!(aknn_decide(&s(&["x", "y", "z", "w", "v"]), 5, 3).unwrap(), "x");
        assert_eq!(aknn_decide(&s(&["y", "x"]), 5, 3).unwrap(), "y");
        // Majority overrides the nearest neighbour.
        assert_eq!(aknn_decide(&s(&["y", "x", "x", "x", "z"]), 5, 3).unwrap(), "x");
        assert!(matches!(aknn_decide::<&str>(&[], 5, 3), Err(Error::EmptyScores)));
    }

    #[test]
    fn identify_and_verify() {
        let gallery: Vec<IrisTemplate> = (0..6)
            .map(|i| template(pseudo_levels(i)).with_label(format!("s{}", i % 3), None))
            .collect();
        let probe = gallery[4].clone();
        let id = identify(&probe, &gallery, &MatchConfig::default()).unwrap();
        assert_eq!(id.label, "s1");
        assert_eq!(id.score.d_min, 0.0);
        assert!(matches!(identify(&probe, &[], &MatchConfig::default()), Err(Error::EmptyGallery)));

        assert!(verify(&probe, &gallery[4..5], 0.1, 4).unwrap().accept);
        let mut levels = probe.levels().to_vec();
        levels[0] = (levels[0] + 1) % 4;
        let changed = template(levels);
        assert!(!verify(&changed, &gallery[4..5], 0.0, 0).unwrap().accept);
        assert!(verify(&changed, &[], 0.0, 0).is_err());
    }

    #[test]
    fn config_bounds() {
        let mut cfg = MatchConfig::default();
        cfg.a = 6;
        assert!(cfg.validate().is_err());
    }
}
