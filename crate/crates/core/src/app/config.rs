//! Flat `key = value` configuration with module-prefixed keys.
//!
//! ```text
//! # comments and blank lines are ignored
//! matching.max_shift = 4
//! features.family = sym4
//! segmentation.canny.sigma = 1.2
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::evaluation::Fusion;
use crate::features::FeatureConfig;
use crate::matching::MatchConfig;
use crate::normalization::NormalizationConfig;
use crate::pipeline::PipelineConfig;
use crate::segmentation::SegmentationConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    /// How per-eye distances combine under the both-eyes protocol.
    pub fusion: Fusion,
}

/// Every tunable of the toolkit in one place.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AppConfig {
    pub segmentation: SegmentationConfig,
    pub normalization: NormalizationConfig,
    pub features: FeatureConfig,
    pub matching: MatchConfig,
    pub evaluation: EvaluationConfig,
}

/// Named preprocessing variants for ablation runs.
pub const ABLATIONS: [(&str, &str); 8] = [
    ("histeq", "normalization.histogram_equalize=true,normalization.beta=0"),
    ("no-compress", "normalization.compress=false"),
    ("histeq-enhance", "normalization.histogram_equalize=true"),
    ("beta60", "normalization.beta=0.6"),
    ("window4", "normalization.window=4"),
    ("beta85", "normalization.beta=0.85"),
    ("beta95", "normalization.beta=0.95"),
    ("full-iris", "normalization.full_iris_roi=true"),
];

impl AppConfig {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            segmentation: self.segmentation.clone(),
            normalization: self.normalization.clone(),
            features: self.features.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline().validate()?;
        self.matching.validate()
    }

    /// Every key in serialisation order.
    pub fn keys() -> Vec<String> {
        let mut out = Vec::new();
        flatten("", &to_value(&AppConfig::default()), &mut |k, _| out.push(k.to_string()));
        out
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let mut v = &to_value(self);
        for part in key.split('.') {
            v = v.get(part)?;
        }
        (!v.is_object()).then(|| scalar_text(v))
    }

    /// Sets one key from its text form; the result is validated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut tree = to_value(self);
        assign(&mut tree, key, value)?;
        let cfg: AppConfig = serde_json::from_value(tree).map_err(|e| Error::Config(format!("{key}: {e}")))?;
        cfg.validate().map_err(|e| Error::Config(format!("{key}: {e}")))?;
        *self = cfg;
        Ok(())
    }

    /// Applies `key=value[,key=value…]`.
    pub fn apply_overrides(&mut self, list: &str) -> Result<()> {
        let mut tree = to_value(self);
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{item}`")))?;
            assign(&mut tree, k.trim(), v.trim())?;
        }
        let cfg: AppConfig = serde_json::from_value(tree).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        *self = cfg;
        Ok(())
    }

    /// Applies a named ablation from [`ABLATIONS`], or an inline
    /// `key=value,…` list.
    pub fn apply_ablation(&mut self, name: &str) -> Result<()> {
        match ABLATIONS.iter().find(|(n, _)| n.eq_ignore_ascii_case(name)) {
            Some((_, list)) => self.apply_overrides(list),
            None if name.contains('=') => self.apply_overrides(name),
            None => Err(Error::Config(format!(
                "unknown ablation `{name}` (known: {})",
                ABLATIONS.map(|(n, _)| n).join(", ")
            ))),
        }
    }

    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tree = to_value(&AppConfig::default());
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            assign(&mut tree, k.trim(), v.trim()).map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        let cfg: AppConfig = serde_json::from_value(tree).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::parse(&text)
    }

    /// One `key = value` line per field.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        flatten("", &to_value(self), &mut |k, v| {
            let _ = writeln!(out, "{k} = {}", scalar_text(v));
        });
        out
    }
}

impl std::str::FromStr for AppConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn to_value(cfg: &AppConfig) -> Value {
    serde_json::to_value(cfg).expect("config serialises")
}

fn flatten(prefix: &str, v: &Value, f: &mut impl FnMut(&str, &Value)) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, f);
            }
        }
        leaf => f(prefix, leaf),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

/// Replaces the leaf at `key`, parsing `text` as the type already there.
fn assign(tree: &mut Value, key: &str, text: &str) -> Result<()> {
    let unknown = || Error::Config(format!("unknown key `{key}`"));
    let mut node = tree;
    for part in key.split('.') {
        node = node.as_object_mut().and_then(|m: &mut Map<String, Value>| m.get_mut(part)).ok_or_else(unknown)?;
    }
    let bad = |what: &str| Error::Config(format!("`{key}` expects {what}, got `{text}`"));
    *node = match node {
        Value::Object(_) => return Err(unknown()),
        Value::Bool(_) => Value::Bool(text.parse().map_err(|_| bad("true or false"))?),
        Value::Number(n) if n.is_f64() => {
            let x: f64 = text.parse().map_err(|_| bad("a number"))?;
            Value::Number(Number::from_f64(x).ok_or_else(|| bad("a finite number"))?)
        }
        Value::Number(_) => Value::Number(text.parse::<u64>().map_err(|_| bad("a non-negative integer"))?.into()),
        Value::String(_) | Value::Null | Value::Array(_) => Value::String(text.to_string()),
    };
    Ok(())
}
