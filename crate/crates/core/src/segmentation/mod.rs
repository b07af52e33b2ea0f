//! Pupil and limbic boundary localisation.
//!
//! The pipeline runs: weighted mask → threshold highlight → canny →
//! five-point chord fit → four-direction refinement → pupil fill →
//! cleaned lower-half limbic scan with the clamp ladder.

mod highlight;
mod limbic;
mod pupil;
mod refine;

pub use highlight::{highlight_pupil, weighted_mask};
pub use limbic::{
    clamp_limbic, clean_radius, cleaned_limbic_edges, limbic_from_hits, limbic_radius, scan_limbic_hits,
    ClampRule, LimbicEstimate, CLAMP_LADDER, MAX_LIMBIC_RATIO,
};
pub use pupil::{boundary_points, chord_center, estimate_pupil, Point};
pub use refine::{fill_pupil, pupil_mean, refine_pupil, RefineOutcome, RefineParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::image::{canny, CannyParams, EdgeMap, GrayImage};

/// Pupil circle in image coordinates (x rightward, y downward).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PupilCircle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl PupilCircle {
    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.r > 0.0
            && self.cx - self.r >= 0.0
            && self.cy - self.r >= 0.0
            && self.cx + self.r <= width as f64 - 1.0
            && self.cy + self.r <= height as f64 - 1.0
    }

    /// Shrinks/moves the circle as little as needed to keep it in the raster.
    pub fn clamped_into(&self, width: usize, height: usize) -> PupilCircle {
        let max_r = ((width.min(height) as f64) - 1.0) / 2.0;
        let r = self.r.clamp(1.0, max_r.max(1.0));
        PupilCircle {
            cx: self.cx.clamp(r, (width as f64 - 1.0 - r).max(r)),
            cy: self.cy.clamp(r, (height as f64 - 1.0 - r).max(r)),
            r,
        }
    }
}

/// Pupil circle plus the concentric limbic radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrisGeometry {
    pub pupil: PupilCircle,
    pub limbic_r: f64,
}

impl IrisGeometry {
    pub fn is_valid(&self) -> bool {
        self.pupil.r > 0.0
            && self.limbic_r > self.pupil.r
            && self.limbic_r <= MAX_LIMBIC_RATIO * self.pupil.r + 1e-9
    }

    /// Translated copy.
    pub fn shifted(&self, dx: f64, dy: f64) -> IrisGeometry {
        IrisGeometry {
            pupil: PupilCircle {
                cx: self.pupil.cx + dx,
                cy: self.pupil.cy + dy,
                r: self.pupil.r,
            },
            limbic_r: self.limbic_r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Mask weight as a fraction of the mean intensity.
    pub a_fraction: f64,
    /// Saturation level of the highlight step.
    pub threshold_t: f64,
    pub fill_enabled: bool,
    /// Extra multiplier on the fill value (1 keeps the plain mean).
    pub fill_scale: f64,
    /// Canny parameters for the highlighted image (pupil search).
    pub canny: CannyParams,
    /// Canny parameters for the limbic search.
    pub limbic_canny: CannyParams,
    pub max_refine_iters: usize,
    pub refine_margin: f64,
    pub refine_radius: bool,
    /// Scan rows cover `[cy, cy + limbic_row_band·R_p]`.
    pub limbic_row_band: f64,
    /// Scans start at `cx ± (R_p + limbic_start_offset)`.
    pub limbic_start_offset: f64,
    pub limbic_iqr_factor: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            a_fraction: 0.02,
            threshold_t: 256.0,
            fill_enabled: true,
            fill_scale: 1.0,
            canny: CannyParams::default(),
            limbic_canny: CannyParams::default(),
            max_refine_iters: 10,
            refine_margin: 20.0,
            refine_radius: true,
            limbic_row_band: 0.9,
            limbic_start_offset: 2.0,
            limbic_iqr_factor: 1.5,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.a_fraction > 0.0 && self.a_fraction < 1.0) {
            return bad("a_fraction", format!("must lie in (0, 1), got {}", self.a_fraction));
        }
        if !(self.threshold_t > 200.0 && self.threshold_t <= 256.0) {
            return bad("threshold_t", format!("must lie in (200, 256], got {}", self.threshold_t));
        }
        if !(self.fill_scale > 0.0) {
            return bad("fill_scale", format!("must be positive, got {}", self.fill_scale));
        }
        if !(self.limbic_row_band > 0.0) || !(self.limbic_iqr_factor >= 0.0) {
            return bad("limbic", "row band must be positive and IQR factor non-negative".into());
        }
        self.canny.validate()?;
        self.limbic_canny.validate()
    }

    fn refine_params(&self) -> RefineParams {
        RefineParams {
            max_iters: self.max_refine_iters,
            margin: self.refine_margin,
            adjust_radius: self.refine_radius,
        }
    }
}

/// Diagnostics raised while segmenting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentationFlags {
    /// Refinement stopped at the iteration cap.
    pub refine_capped: bool,
    /// Limbic scan failed and `R_l = 3·R_p` was substituted.
    pub limbic_fallback: bool,
    /// Index into [`CLAMP_LADDER`] of the rule that fired.
    pub clamp_rule: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub geometry: IrisGeometry,
    pub flags: SegmentationFlags,
}

/// Intermediate rasters of one segmentation run, for debug dumps.
#[derive(Debug, Clone)]
pub struct SegmentationTrace {
    pub mask: GrayImage,
    pub highlighted: GrayImage,
    pub pupil_edges: EdgeMap,
    pub estimate: PupilCircle,
    pub refined: PupilCircle,
    pub filled: GrayImage,
    pub limbic_edges: Option<EdgeMap>,
}

/// Locates pupil and limbic boundaries. Stage errors are tagged with the
/// stage that raised them.
pub fn segment(img: &GrayImage, cfg: &SegmentationConfig) -> Result<Segmentation> {
    run(img, cfg, false).map(|(s, _)| s)
}

/// Like [`segment`] but keeps every intermediate raster.
pub fn segment_traced(img: &GrayImage, cfg: &SegmentationConfig) -> Result<(Segmentation, SegmentationTrace)> {
    run(img, cfg, true).map(|(s, t)| (s, t.expect("trace requested")))
}

fn run(img: &GrayImage, cfg: &SegmentationConfig, keep: bool) -> Result<(Segmentation, Option<SegmentationTrace>)> {
    cfg.validate()?;
    let (w, h) = img.dims();
    let mask = weighted_mask(img, cfg.a_fraction);
    let highlighted = highlight_pupil(img, &mask, cfg.threshold_t).map_err(|e| e.at(Stage::Highlight))?;
    let pupil_edges = canny(&highlighted, &cfg.canny).map_err(|e| e.at(Stage::EdgeDetection))?;
    let estimate = estimate_pupil(&pupil_edges).map_err(|e| e.at(Stage::PupilEstimate))?;
    let estimate = estimate.clamped_into(w, h);

    let mut flags = SegmentationFlags::default();
    let mean = pupil_mean(img, &estimate);
    let outcome = refine_pupil(img, &estimate, mean, &cfg.refine_params());
    flags.refine_capped = !outcome.converged;
    let pupil = outcome.circle;

    let filled = if cfg.fill_enabled {
        fill_pupil(img, &pupil, cfg.fill_scale)
    } else {
        img.clone()
    };

    let limbic_edges = if keep {
        Some(cleaned_limbic_edges(&filled, &pupil, cfg).map_err(|e| e.at(Stage::Limbic))?)
    } else {
        None
    };
    let limbic_r = match limbic_radius(&filled, &pupil, cfg) {
        Ok(est) => {
            flags.clamp_rule = est.clamp_rule;
            est.radius
        }
        Err(Error::NoLimbicPoints { .. }) => {
            flags.limbic_fallback = true;
            3.0 * pupil.r
        }
        Err(e) => return Err(e.at(Stage::Limbic)),
    };
    // Degenerate scans can land inside the pupil; keep the annulus non-empty.
    let limbic_r = limbic_r.max(pupil.r + 1.0);

    let seg = Segmentation {
        geometry: IrisGeometry { pupil, limbic_r },
        flags,
    };
    let trace = keep.then(|| SegmentationTrace {
        mask,
        highlighted,
        pupil_edges,
        estimate,
        refined: pupil,
        filled,
        limbic_edges,
    });
    Ok((seg, trace))
}

/// Draws both circles at full intensity (255) over a copy of the image.
pub fn overlay(img: &GrayImage, g: &IrisGeometry) -> GrayImage {
    let mut out = img.clone();
    for radius in [g.pupil.r, g.limbic_r] {
        let steps = (radius * std::f64::consts::TAU * 2.0).ceil().max(8.0) as usize;
        for k in 0..steps {
            let t = k as f64 / steps as f64 * std::f64::consts::TAU;
            let x = (g.pupil.cx + radius * t.cos()).round();
            let y = (g.pupil.cy + radius * t.sin()).round();
            if x >= 0.0 && y >= 0.0 && (x as usize) < img.width() && (y as usize) < img.height() {
                out.set(x as usize, y as usize, 255.0);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_image_has_no_pupil() {
        let img = GrayImage::filled(320, 280, 255.0);
        let err = segment(&img, &SegmentationConfig::default()).unwrap_err();
        assert_eq!(err.stage(), Some(Stage::PupilEstimate));
        assert!(matches!(err.root(), Error::TooFewEdgePoints { .. }));
    }

    #[test]
    fn config_bounds() {
        let mut cfg = SegmentationConfig::default();
        cfg.threshold_t = 200.0;
        assert!(cfg.validate().is_err());
        cfg.threshold_t = 256.0;
        cfg.a_fraction = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn clamping_circle_keeps_it_inside() {
        let c = PupilCircle { cx: 2.0, cy: 95.0, r: 10.0 }.clamped_into(100, 100);
        assert!(c.fits_in(100, 100));
    }
}
