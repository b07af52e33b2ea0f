use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{read_circles, DatasetIndex};
use crate::error::{Error, Result};
use crate::image::load_gray;
use crate::segmentation::{segment, IrisGeometry, SegmentationConfig};

/// Largest tolerated foreign or lost area, as a fraction of the true iris.
pub const AREA_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusOverlap {
    /// Pixels of the true annulus.
    pub truth_area: usize,
    /// Predicted pixels outside the true annulus.
    pub foreign: usize,
    /// True pixels the prediction misses.
    pub lost: usize,
}

impl AnnulusOverlap {
    pub fn foreign_fraction(&self) -> f64 {
        self.foreign as f64 / self.truth_area.max(1) as f64
    }

    pub fn lost_fraction(&self) -> f64 {
        self.lost as f64 / self.truth_area.max(1) as f64
    }

    pub fn is_correct(&self) -> bool {
        self.foreign_fraction() <= AREA_TOLERANCE && self.lost_fraction() <= AREA_TOLERANCE
    }
}

fn in_annulus(g: &IrisGeometry, x: f64, y: f64) -> bool {
    let d = (x - g.pupil.cx).hypot(y - g.pupil.cy);
    d >= g.pupil.r && d < g.limbic_r
}

/// Pixel-count comparison of two annuli (pixel centres on the integer grid).
pub fn annulus_overlap(pred: &IrisGeometry, truth: &IrisGeometry) -> AnnulusOverlap {
    let bounds = |g: &IrisGeometry| {
        (
            g.pupil.cx - g.limbic_r,
            g.pupil.cx + g.limbic_r,
            g.pupil.cy - g.limbic_r,
            g.pupil.cy + g.limbic_r,
        )
    };
    let (a, b) = (bounds(pred), bounds(truth));
    let x0 = a.0.min(b.0).floor() as i64;
    let x1 = a.1.max(b.1).ceil() as i64;
    let y0 = a.2.min(b.2).floor() as i64;
    let y1 = a.3.max(b.3).ceil() as i64;
    let mut out = AnnulusOverlap {
        truth_area: 0,
        foreign: 0,
        lost: 0,
    };
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = in_annulus(pred, x as f64, y as f64);
            let t = in_annulus(truth, x as f64, y as f64);
            out.truth_area += usize::from(t);
            out.foreign += usize::from(p && !t);
            out.lost += usize::from(t && !p);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationCase {
    pub image: String,
    pub truth: IrisGeometry,
    /// `None` when segmentation failed.
    pub predicted: Option<IrisGeometry>,
    pub overlap: Option<AnnulusOverlap>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub images: usize,
    pub correct: usize,
    pub accuracy_pct: f64,
    pub cases: Vec<LocalizationCase>,
    /// Mean segmentation time per image; not serialised.
    #[serde(skip)]
    pub mean_time: Option<Duration>,
}

/// Scores predictions against ground truth with the 5% area rule.
pub fn localization_report(pairs: &[(String, IrisGeometry, Option<IrisGeometry>)]) -> LocalizationReport {
    let cases: Vec<LocalizationCase> = pairs
        .iter()
        .map(|(image, truth, predicted)| {
            let overlap = predicted.map(|p| annulus_overlap(&p, truth));
            LocalizationCase {
                image: image.clone(),
                truth: *truth,
                predicted: *predicted,
                overlap,
                correct: overlap.is_some_and(|o| o.is_correct()),
            }
        })
        .collect();
    let correct = cases.iter().filter(|c| c.correct).count();
    LocalizationReport {
        images: cases.len(),
        correct,
        accuracy_pct: if cases.is_empty() { 0.0 } else { 100.0 * correct as f64 / cases.len() as f64 },
        cases,
        mean_time: None,
    }
}

/// Segments every image of the index and compares with its sidecar circles.
pub fn localization_eval(index: &DatasetIndex, cfg: &SegmentationConfig) -> Result<LocalizationReport> {
    let truths: Vec<IrisGeometry> = index
        .entries
        .iter()
        .map(|e| read_circles(&e.path))
        .collect::<Result<_>>()?;
    if truths.is_empty() {
        return Err(Error::MissingGroundTruth(Default::default()));
    }
    let timed: Vec<(Option<IrisGeometry>, Duration)> = index
        .entries
        .par_iter()
        .map(|e| {
            let img = load_gray(&e.path).ok();
            let start = Instant::now();
            let pred = img.and_then(|img| segment(&img, cfg).ok()).map(|s| s.geometry);
            (pred, start.elapsed())
        })
        .collect();
    let pairs: Vec<(String, IrisGeometry, Option<IrisGeometry>)> = index
        .entries
        .iter()
        .zip(&truths)
        .zip(&timed)
        .map(|((e, t), (p, _))| (e.path.display().to_string(), *t, *p))
        .collect();
    let mut report = localization_report(&pairs);
    let total: Duration = timed.iter().map(|(_, d)| *d).sum();
    report.mean_time = Some(total / timed.len() as u32);
    Ok(report)
}
