use super::{PupilCircle, SegmentationConfig};
use crate::error::{Error, Result};
use crate::image::{canny, EdgeMap, GrayImage};

/// Radius of the disc around the pupil centre whose edges are erased before
/// the limbic search. Branches are evaluated in this exact order.
pub fn clean_radius(r_p: f64) -> f64 {
    let k = if r_p < 33.0 {
        2.85
    } else if r_p <= 35.0 {
        2.65
    } else if r_p <= 36.0 {
        2.69
    } else if r_p < 41.0 {
        2.38
    } else if r_p < 47.0 {
        2.15
    } else if r_p < 51.0 {
        1.92
    } else if r_p < 55.0 {
        1.7
    } else {
        1.5
    };
    (k * r_p).ceil()
}

/// One row of the limbic clamp ladder: when `lo < R_p < hi` and
/// `R_l > trigger·R_p`, `R_l` becomes `value·R_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampRule {
    pub lo: f64,
    pub hi: f64,
    pub trigger: f64,
    pub value: f64,
}

pub const CLAMP_LADDER: [ClampRule; 7] = [
    ClampRule { lo: 47.0, hi: 52.0, trigger: 2.6, value: 2.0 },
    ClampRule { lo: 44.0, hi: 47.0, trigger: 2.7, value: 2.1 },
    ClampRule { lo: 41.0, hi: 44.0, trigger: 2.8, value: 2.3 },
    ClampRule { lo: 35.0, hi: 41.0, trigger: 3.0, value: 3.0 },
    ClampRule { lo: 35.0, hi: 41.0, trigger: 3.3, value: 2.6 },
    ClampRule { lo: 31.0, hi: 35.0, trigger: 3.4, value: 3.4 },
    ClampRule { lo: 23.0, hi: 31.0, trigger: 3.5, value: 3.6 },
];

/// Hard ceiling on the limbic/pupil ratio applied after the ladder.
pub const MAX_LIMBIC_RATIO: f64 = 3.6;

/// Applies the clamp ladder (first matching rule wins), then the global
/// `R_l ≤ 3.6·R_p` ceiling. Returns the clamped radius and the index of the
/// rule that fired, if any.
pub fn clamp_limbic(r_p: f64, r_l: f64) -> (f64, Option<usize>) {
    for (i, rule) in CLAMP_LADDER.iter().enumerate() {
        if r_p > rule.lo && r_p < rule.hi && r_l > rule.trigger * r_p {
            return (rule.value * r_p, Some(i));
        }
    }
    (r_l.min(MAX_LIMBIC_RATIO * r_p), None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimbicEstimate {
    pub radius: f64,
    /// Mean of the surviving scan distances, before clamping.
    pub raw_radius: f64,
    pub clamp_rule: Option<usize>,
    pub hits: usize,
    pub inliers: usize,
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Edge map used by the limbic search: canny of `img` with every edge closer
/// than `clean_radius(R_p)` to the pupil centre erased.
pub fn cleaned_limbic_edges(img: &GrayImage, pupil: &PupilCircle, cfg: &SegmentationConfig) -> Result<EdgeMap> {
    let mut edges = canny(img, &cfg.limbic_canny)?;
    let clean = clean_radius(pupil.r);
    for (x, y) in edges.points() {
        if (x as f64 - pupil.cx).hypot(y as f64 - pupil.cy) < clean {
            edges.set(x, y, false);
        }
    }
    Ok(edges)
}

/// Scans the cleaned edge map sideways along the rows just below the pupil
/// centre and returns the distance from the centre to the first edge found on
/// each side of each row.
pub fn scan_limbic_hits(edges: &EdgeMap, pupil: &PupilCircle, cfg: &SegmentationConfig) -> Vec<f64> {
    let w = edges.width() as isize;
    let y_start = pupil.cy.round() as isize;
    let y_end = (pupil.cy + cfg.limbic_row_band * pupil.r).round() as isize;
    let offset = pupil.r + cfg.limbic_start_offset;
    let mut hits = Vec::new();
    for y in y_start..=y_end {
        if y < 0 || y >= edges.height() as isize {
            continue;
        }
        for step in [-1isize, 1] {
            let mut x = (pupil.cx + step as f64 * offset).round() as isize;
            while x >= 0 && x < w {
                if edges.get(x as usize, y as usize) {
                    hits.push((x as f64 - pupil.cx).hypot(y as f64 - pupil.cy));
                    break;
                }
                x += step;
            }
        }
    }
    hits
}

/// Limbic radius from the lower-half sideways scan: outliers beyond
/// `iqr_factor × IQR` of the median are dropped, the survivors averaged, and
/// the clamp ladder applied.
pub fn limbic_radius(img: &GrayImage, pupil: &PupilCircle, cfg: &SegmentationConfig) -> Result<LimbicEstimate> {
    let edges = cleaned_limbic_edges(img, pupil, cfg)?;
    let hits = scan_limbic_hits(&edges, pupil, cfg);
    limbic_from_hits(pupil.r, &hits, cfg.limbic_iqr_factor)
}

pub fn limbic_from_hits(r_p: f64, hits: &[f64], iqr_factor: f64) -> Result<LimbicEstimate> {
    if hits.len() < 3 {
        return Err(Error::NoLimbicPoints { found: hits.len() });
    }
    let mut sorted = hits.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = quantile(&sorted, 0.5);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let keep: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|d| (d - median).abs() <= iqr_factor * iqr)
        .collect();
    if keep.len() < 3 {
        return Err(Error::NoLimbicPoints { found: keep.len() });
    }
    let raw = keep.iter().sum::<f64>() / keep.len() as f64;
    let (radius, clamp_rule) = clamp_limbic(r_p, raw);
    Ok(LimbicEstimate {
        radius,
        raw_radius: raw,
        clamp_rule,
        hits: hits.len(),
        inliers: keep.len(),
    })
}
