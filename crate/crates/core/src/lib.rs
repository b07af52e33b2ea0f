//! Iris recognition: pupil and limbic localisation, rubber-sheet
//! normalisation, stationary-wavelet 2-bit codes, shift-tolerant matching
//! with a K-nearest-neighbour vote, and a dataset evaluation harness with a
//! synthetic eye generator.
//!
//! ```no_run
//! use irisrec::image::load_gray;
//! use irisrec::matching::{semi_correlation, MatchConfig};
//! use irisrec::pipeline::{extract_template, PipelineConfig};
//!
//! let cfg = PipelineConfig::default();
//! let a = extract_template(&load_gray("a.pgm")?, &cfg)?;
//! let b = extract_template(&load_gray("b.pgm")?, &cfg)?;
//! let score = semi_correlation(&a, &b, MatchConfig::default().max_shift)?;
//! println!("d = {:.3} at shift {}", score.d_min, score.best_shift);
//! # Ok::<(), irisrec::Error>(())
//! ```

pub mod app;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod image;
pub mod matching;
pub mod normalization;
pub mod pipeline;
pub mod segmentation;

pub use error::{Error, Result, Stage};
