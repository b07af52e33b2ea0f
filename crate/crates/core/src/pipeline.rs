//! Image → iris code, composing segmentation, normalisation and features.

use serde::{Deserialize, Serialize};

use crate::error::{Result, Stage};
use crate::features::{encode_features, FeatureCode, FeatureConfig, IrisTemplate};
use crate::image::GrayImage;
use crate::normalization::{prepare_roi, unwrap, Matrix, NormalizationConfig, RoiStages};
use crate::segmentation::{segment, IrisGeometry, Segmentation, SegmentationConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub segmentation: SegmentationConfig,
    pub normalization: NormalizationConfig,
    pub features: FeatureConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.segmentation.validate()?;
        self.normalization.validate()?;
        self.features.validate()
    }
}

/// Everything produced on the way to a code.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub segmentation: Segmentation,
    pub strip: Matrix,
    pub roi: RoiStages,
    pub code: FeatureCode,
}

/// Code from a known geometry (skips segmentation).
pub fn code_from_geometry(img: &GrayImage, g: &IrisGeometry, cfg: &PipelineConfig) -> Result<(Matrix, RoiStages, FeatureCode)> {
    let strip = unwrap(img, g).map_err(|e| e.at(Stage::Normalization))?;
    let roi = prepare_roi(&strip, &cfg.normalization).map_err(|e| e.at(Stage::Normalization))?;
    let code = encode_features(&roi.compressed, &cfg.features).map_err(|e| e.at(Stage::Features))?;
    Ok((strip, roi, code))
}

pub fn extract(img: &GrayImage, cfg: &PipelineConfig) -> Result<Extraction> {
    let segmentation = segment(img, &cfg.segmentation)?;
    let (strip, roi, code) = code_from_geometry(img, &segmentation.geometry, cfg)?;
    Ok(Extraction {
        segmentation,
        strip,
        roi,
        code,
    })
}

pub fn extract_code(img: &GrayImage, cfg: &PipelineConfig) -> Result<FeatureCode> {
    extract(img, cfg).map(|e| e.code)
}

/// The standard 320-feature template; fails with a length error when the
/// configured selection does not yield two 160-feature segments.
pub fn extract_template(img: &GrayImage, cfg: &PipelineConfig) -> Result<IrisTemplate> {
    IrisTemplate::from_code(extract_code(img, cfg)?).map_err(|e| e.at(Stage::Features))
}
