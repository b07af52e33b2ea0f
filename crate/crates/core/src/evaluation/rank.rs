use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::DatasetIndex;
use crate::error::{Error, Result};
use crate::features::{Eye, FeatureCode};
use crate::image::load_gray;
use crate::matching::{aknn_decide, semi_correlation_codes, MatchConfig};
use crate::pipeline::{extract_code, PipelineConfig};

/// One sample ready for matching. `code` is `None` when extraction failed.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCode {
    pub id: String,
    pub subject: String,
    pub eye: Option<Eye>,
    pub code: Option<FeatureCode>,
}

/// Loads and encodes every image of the index (in parallel, order kept).
pub fn extract_codes(index: &DatasetIndex, cfg: &PipelineConfig) -> Vec<LabeledCode> {
    index
        .entries
        .par_iter()
        .map(|e| {
            let code = load_gray(&e.path).and_then(|img| extract_code(&img, cfg)).ok();
            LabeledCode {
                id: e.path.display().to_string(),
                subject: e.subject.clone(),
                eye: e.eye,
                code,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Every image, eye flags ignored.
    All,
    Left,
    Right,
    /// Left and right captures paired by order, distances fused.
    BothEyes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fusion {
    #[default]
    Min,
    Mean,
}

impl Fusion {
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Fusion::Min => a.min(b),
            Fusion::Mean => (a + b) / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeError {
    pub probe: String,
    pub truth: String,
    /// `None` when the probe could not be encoded.
    pub decided: Option<String>,
    pub d_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank1Report {
    pub protocol: Protocol,
    pub enroll_n: usize,
    pub subjects: usize,
    pub probes: usize,
    pub correct: usize,
    pub accuracy_pct: f64,
    /// Enrollment images that failed to encode and were left out.
    pub enroll_failures: usize,
    pub errors: Vec<ProbeError>,
    /// Wall-clock matching time; not serialised so reports are reproducible.
    #[serde(skip)]
    pub timing: Option<Timing>,
}

impl Rank1Report {
    pub fn error_pct(&self) -> f64 {
        100.0 - self.accuracy_pct
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub total: Duration,
    pub comparisons: usize,
}

impl Timing {
    pub fn per_comparison(&self) -> Duration {
        self.total / self.comparisons.max(1) as u32
    }
}

/// A gallery or probe unit: one code per eye slot.
struct Unit<'a> {
    id: String,
    subject: &'a str,
    codes: Vec<Option<&'a FeatureCode>>,
}

fn units<'a>(samples: &'a [LabeledCode], protocol: Protocol) -> BTreeMap<&'a str, Vec<Unit<'a>>> {
    let mut by_subject: BTreeMap<&str, Vec<&LabeledCode>> = BTreeMap::new();
    for s in samples {
        by_subject.entry(&s.subject).or_default().push(s);
    }
    let keep = |eye: Option<Eye>| match protocol {
        Protocol::All => true,
        Protocol::Left => eye == Some(Eye::Left),
        Protocol::Right => eye == Some(Eye::Right),
        Protocol::BothEyes => false,
    };
    by_subject
        .into_iter()
        .map(|(subject, list)| {
            let units: Vec<Unit> = if protocol == Protocol::BothEyes {
                let left: Vec<&LabeledCode> = list.iter().copied().filter(|s| s.eye == Some(Eye::Left)).collect();
                let right: Vec<&LabeledCode> = list.iter().copied().filter(|s| s.eye == Some(Eye::Right)).collect();
                left.iter()
                    .zip(&right)
                    .map(|(l, r)| Unit {
                        id: format!("{}+{}", l.id, r.id),
                        subject,
                        codes: vec![l.code.as_ref(), r.code.as_ref()],
                    })
                    .collect()
            } else {
                list.iter()
                    .filter(|s| keep(s.eye))
                    .map(|s| Unit {
                        id: s.id.clone(),
                        subject,
                        codes: vec![s.code.as_ref()],
                    })
                    .collect()
            };
            (subject, units)
        })
        .filter(|(_, u)| !u.is_empty())
        .collect()
}

/// Rank-1 identification: the first `enroll_n` units of every subject are
/// enrolled, the rest probe the gallery. Units pair left and right captures
/// under [`Protocol::BothEyes`], where per-eye distances are fused.
pub fn rank1_from_codes(
    samples: &[LabeledCode],
    enroll_n: usize,
    protocol: Protocol,
    fusion: Fusion,
    cfg: &MatchConfig,
) -> Result<Rank1Report> {
    cfg.validate()?;
    let groups = units(samples, protocol);
    if groups.is_empty() {
        return Err(Error::TooFewSubjects { have: 0, need: 1 });
    }
    for (subject, list) in &groups {
        if list.len() <= enroll_n {
            return Err(Error::InsufficientImages {
                subject: subject.to_string(),
                have: list.len(),
                need: enroll_n,
            });
        }
    }
    let mut gallery: Vec<&Unit> = Vec::new();
    let mut probes: Vec<&Unit> = Vec::new();
    let mut enroll_failures = 0;
    for list in groups.values() {
        for (k, unit) in list.iter().enumerate() {
            if k < enroll_n {
                if unit.codes.iter().all(|c| c.is_some()) {
                    gallery.push(unit);
                } else {
                    enroll_failures += 1;
                }
            } else {
                probes.push(unit);
            }
        }
    }
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }

    let start = Instant::now();
    let outcomes: Vec<Result<Option<(String, f64)>>> = probes
        .par_iter()
        .map(|probe| {
            if probe.codes.iter().any(|c| c.is_none()) {
                return Ok(None);
            }
            let mut scores = Vec::with_capacity(gallery.len());
            for g in &gallery {
                let mut fused: Option<f64> = None;
                for (p, q) in probe.codes.iter().zip(&g.codes) {
                    let d = semi_correlation_codes(p.expect("checked"), q.expect("checked"), cfg.max_shift)?.d_min;
                    fused = Some(fused.map_or(d, |f| fusion.apply(f, d)));
                }
                scores.push((g.subject.to_string(), fused.expect("at least one eye")));
            }
            let label = aknn_decide(&scores, cfg.k, cfg.a)?;
            let d = scores
                .iter()
                .filter(|(l, _)| *l == label)
                .map(|(_, d)| *d)
                .fold(f64::INFINITY, f64::min);
            Ok(Some((label, d)))
        })
        .collect();
    let elapsed = start.elapsed();

    let mut correct = 0;
    let mut errors = Vec::new();
    for (probe, outcome) in probes.iter().zip(outcomes) {
        match outcome? {
            Some((label, _)) if label == probe.subject => correct += 1,
            Some((label, d)) => errors.push(ProbeError {
                probe: probe.id.clone(),
                truth: probe.subject.to_string(),
                decided: Some(label),
                d_min: Some(d),
            }),
            None => errors.push(ProbeError {
                probe: probe.id.clone(),
                truth: probe.subject.to_string(),
                decided: None,
                d_min: None,
            }),
        }
    }
    let n = probes.len();
    Ok(Rank1Report {
        protocol,
        enroll_n,
        subjects: groups.len(),
        probes: n,
        correct,
        accuracy_pct: if n == 0 { 100.0 } else { 100.0 * correct as f64 / n as f64 },
        enroll_failures,
        errors,
        timing: Some(Timing {
            total: elapsed,
            comparisons: n * gallery.len() * if protocol == Protocol::BothEyes { 2 } else { 1 },
        }),
    })
}

/// Loads, encodes and evaluates a dataset.
pub fn rank1_eval(
    index: &DatasetIndex,
    enroll_n: usize,
    protocol: Protocol,
    pipeline: &PipelineConfig,
    matching: &MatchConfig,
) -> Result<Rank1Report> {
    let codes = extract_codes(index, pipeline);
    rank1_from_codes(&codes, enroll_n, protocol, Fusion::default(), matching)
}
