use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage names attached to propagated errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Highlight,
    EdgeDetection,
    PupilEstimate,
    Refinement,
    Fill,
    Limbic,
    Normalization,
    Features,
    Matching,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Highlight => "highlight",
            Stage::EdgeDetection => "edge-detection",
            Stage::PupilEstimate => "pupil-estimate",
            Stage::Refinement => "refinement",
            Stage::Fill => "fill",
            Stage::Limbic => "limbic",
            Stage::Normalization => "normalization",
            Stage::Features => "features",
            Stage::Matching => "matching",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image data: {0}")]
    CorruptImage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("image {width}x{height} is smaller than the {support}-pixel gaussian support")]
    DegenerateInput {
        width: usize,
        height: usize,
        support: usize,
    },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("chord bisectors are parallel")]
    ParallelBisectors,
    #[error("too few edge points: found {found}, need {needed}")]
    TooFewEdgePoints { found: usize, needed: usize },
    #[error("all chord pairs are degenerate")]
    AllChordsDegenerate,
    #[error("only {found} limbic boundary points survived")]
    NoLimbicPoints { found: usize },
    #[error("iris annulus leaves the image")]
    AnnulusOutOfBounds,

    #[error("unknown wavelet family `{0}`")]
    UnknownFamily(String),
    #[error("unknown coefficient selection `{0}`")]
    UnknownSelection(String),
    #[error("decomposition level {requested} unavailable (have {available})")]
    LevelUnavailable { requested: usize, available: usize },
    #[error("matrix {rows}x{cols} is too small for the transform")]
    MatrixTooSmall { rows: usize, cols: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("template must hold {expected} levels, got {found}")]
    TemplateLength { found: usize, expected: usize },
    #[error("empty score list")]
    EmptyScores,
    #[error("empty gallery")]
    EmptyGallery,

    #[error("class too small: {size} vectors (need at least 2)")]
    ClassTooSmall { size: usize },
    #[error("all features are degenerate (zero within-class variance)")]
    AllFeaturesDegenerate,
    #[error("subject `{subject}` has {have} images, need more than {need}")]
    InsufficientImages {
        subject: String,
        have: usize,
        need: usize,
    },
    #[error("dataset needs at least {need} subjects, found {have}")]
    TooFewSubjects { have: usize, need: usize },
    #[error("missing ground truth for {0}")]
    MissingGroundTruth(PathBuf),
    #[error("invalid synthetic eye spec: {0}")]
    InvalidSynthSpec(String),

    #[error("bad store magic")]
    BadMagic,
    #[error("store file truncated")]
    Truncated,
    #[error("unsupported store version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("duplicate store key {0}")]
    DuplicateKey(String),
    #[error("malformed store record: {0}")]
    MalformedRecord(String),

    #[error("config error: {0}")]
    Config(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The stage a propagated error came from, if it was tagged.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The innermost error, with stage tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
