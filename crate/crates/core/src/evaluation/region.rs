use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::DatasetIndex;
use super::dis::dis_criterion;
use crate::error::{Error, Result};
use crate::features::{first_row_reduce, make_filters, select_features, swt2};
use crate::image::load_gray;
use crate::normalization::{compress_roi, enhance_roi, unwrap, Matrix, ROI_ROWS, STRIP_COLS, STRIP_ROWS};
use crate::pipeline::PipelineConfig;
use crate::segmentation::segment;

/// Strip regions compared by the information report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    /// The lower-iris ROI used for recognition.
    A,
    /// Upper half of the iris (angles 180°..360°), inner band.
    B,
    /// Outer radial band below the ROI rows.
    C,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::A, Region::B, Region::C];

    /// `(row0, rows, col0, cols)` of the region in the 50×300 strip.
    pub fn window(self, cfg: &PipelineConfig) -> (usize, usize, usize, usize) {
        let n = &cfg.normalization;
        match self {
            Region::A => (0, n.roi_rows, n.roi_start_col, n.roi_cols),
            Region::B => (0, ROI_ROWS, STRIP_COLS / 2, STRIP_COLS / 2),
            Region::C => (ROI_ROWS, STRIP_ROWS - ROI_ROWS, n.roi_start_col, n.roi_cols),
        }
    }
}

/// Real-valued wavelet features of one strip region (before quantisation).
pub fn region_features(strip: &Matrix, region: Region, cfg: &PipelineConfig) -> Result<Vec<f64>> {
    let (r0, rows, c0, cols) = region.window(cfg);
    let window = strip.window(r0, rows, c0, cols);
    let enhanced = enhance_roi(&window, cfg.normalization.window, cfg.normalization.beta);
    let input = if cfg.normalization.compress && rows % 2 == 0 {
        compress_roi(&enhanced)?
    } else {
        enhanced
    };
    let dec = swt2(&input, &make_filters(cfg.features.family), cfg.features.levels)?;
    let mats = select_features(&dec, &cfg.features.selection)?;
    Ok(first_row_reduce(&mats))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub region: Region,
    /// Sum of Dis over all class pairs.
    pub dis_sum: f64,
    pub distinct_pct: f64,
    pub non_distinct_pct: f64,
    pub excluded_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub classes: usize,
    pub rows: Vec<RegionRow>,
}

impl RegionReport {
    pub fn row(&self, region: Region) -> &RegionRow {
        self.rows.iter().find(|r| r.region == region).expect("all regions reported")
    }
}

/// Rescales every feature to zero mean and unit variance over all samples
/// of all classes, so Dis sums of regions with different contrast compare.
fn standardize(feats: &mut [Vec<Vec<f64>>]) {
    let n = feats.iter().flatten().next().map_or(0, |v| v.len());
    let count = feats.iter().map(|c| c.len()).sum::<usize>() as f64;
    for i in 0..n {
        let mean = feats.iter().flatten().map(|v| v[i]).sum::<f64>() / count;
        let var = feats.iter().flatten().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / count;
        let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 1.0 };
        for v in feats.iter_mut().flatten() {
            v[i] = (v[i] - mean) * scale;
        }
    }
}

/// Region report from per-class strips. Features are standardised over the
/// whole population before the pairwise Dis sums.
pub fn region_report_from_strips(classes: &BTreeMap<String, Vec<Matrix>>, cfg: &PipelineConfig) -> Result<RegionReport> {
    if classes.len() < 2 {
        return Err(Error::ClassTooSmall { size: classes.len() });
    }
    let mut sums = Vec::new();
    for region in Region::ALL {
        let mut feats: Vec<Vec<Vec<f64>>> = classes
            .values()
            .map(|strips| strips.iter().map(|s| region_features(s, region, cfg)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        standardize(&mut feats);
        let mut sum = 0.0;
        let mut excluded = 0;
        for a in 0..feats.len() {
            for b in a + 1..feats.len() {
                let r = dis_criterion(&feats[a], &feats[b])?;
                sum += r.dis;
                excluded += r.excluded;
            }
        }
        sums.push((region, sum, excluded));
    }
    let base = sums[0].1;
    let rows = sums
        .into_iter()
        .map(|(region, dis_sum, excluded_features)| {
            let distinct_pct = if base > 0.0 { 100.0 * dis_sum / base } else { 0.0 };
            RegionRow {
                region,
                dis_sum,
                distinct_pct,
                non_distinct_pct: (100.0 - distinct_pct).max(0.0),
                excluded_features,
            }
        })
        .collect();
    Ok(RegionReport {
        classes: classes.len(),
        rows,
    })
}

/// Segments and unwraps every image, then compares regions A, B and C by
/// their summed class separability. Images that fail to segment are skipped.
pub fn region_information_report(index: &DatasetIndex, cfg: &PipelineConfig) -> Result<RegionReport> {
    let strips: Vec<Option<Matrix>> = index
        .entries
        .par_iter()
        .map(|e| {
            let img = load_gray(&e.path).ok()?;
            let seg = segment(&img, &cfg.segmentation).ok()?;
            unwrap(&img, &seg.geometry).ok()
        })
        .collect();
    let mut classes: BTreeMap<String, Vec<Matrix>> = BTreeMap::new();
    for (e, s) in index.entries.iter().zip(strips) {
        if let Some(s) = s {
            let key = match e.eye {
                Some(eye) => format!("{}/{eye}", e.subject),
                None => e.subject.clone(),
            };
            classes.entry(key).or_default().push(s);
        }
    }
    region_report_from_strips(&classes, cfg)
}
