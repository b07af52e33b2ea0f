//! Dataset-level measurements and the synthetic cohort generator.

mod dataset;
mod dis;
mod distribution;
mod localization;
mod rank;
mod region;
mod synth;

pub use dataset::{circles_path, eye_from_stem, format_circles, parse_circles, read_circles, DatasetEntry, DatasetIndex};
pub use dis::{dis_criterion, DisResult};
pub use distribution::{
    distribution_from_codes, histogram, read_histogram_csv, read_pairs_csv, Distribution, HistogramBin, Moments,
    PairDistance, PairKind, HISTOGRAM_BINS,
};
pub use localization::{
    annulus_overlap, localization_eval, localization_report, AnnulusOverlap, LocalizationCase, LocalizationReport,
    AREA_TOLERANCE,
};
pub use rank::{extract_codes, rank1_eval, rank1_from_codes, Fusion, LabeledCode, ProbeError, Protocol, Rank1Report, Timing};
pub use region::{region_features, region_information_report, region_report_from_strips, Region, RegionReport, RegionRow};
pub use synth::{
    capture_spec, cohort_images, identity_geometry, synth_eye, write_cohort, CaptureProfile, CohortSpec, SynthEyeSpec,
};

use crate::error::Result;
use crate::pipeline::{extract_code, PipelineConfig};
use rayon::prelude::*;

/// Encodes an in-memory cohort (see [`cohort_images`]).
pub fn encode_cohort(cohort: &CohortSpec, cfg: &PipelineConfig) -> Result<Vec<LabeledCode>> {
    let images = cohort_images(cohort)?;
    Ok(images
        .into_par_iter()
        .enumerate()
        .map(|(i, (subject, eye, img, _))| LabeledCode {
            id: format!("{subject}#{i}"),
            subject,
            eye,
            code: extract_code(&img, cfg).ok(),
        })
        .collect())
}
