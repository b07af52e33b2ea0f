use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Features per template (160 from each of two sub-bands).
pub const TEMPLATE_LEVELS: usize = 320;
/// Packed size: two bits per feature.
pub const TEMPLATE_BYTES: usize = TEMPLATE_LEVELS / 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    pub fn to_byte(self) -> u8 {
        match self {
            Eye::Left => 0,
            Eye::Right => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Eye> {
        match b {
            0 => Some(Eye::Left),
            1 => Some(Eye::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Eye {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eye::Left => "left",
            Eye::Right => "right",
        })
    }
}

impl FromStr for Eye {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Eye::Left),
            "right" | "r" => Ok(Eye::Right),
            _ => Err(Error::InvalidParameter {
                name: "eye",
                reason: format!("expected left or right, got {s:?}"),
            }),
        }
    }
}

/// Quantised feature sequence of any length, split into equal-length
/// angular segments that shift together during matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCode {
    pub levels: Vec<u8>,
    pub segment_len: usize,
}

impl FeatureCode {
    pub fn new(levels: Vec<u8>, segment_len: usize) -> Result<Self> {
        if segment_len == 0 || levels.is_empty() || !levels.len().is_multiple_of(segment_len) {
            return Err(Error::InvalidParameter {
                name: "segment_len",
                reason: format!("{} levels do not split into segments of {segment_len}", levels.len()),
            });
        }
        if levels.iter().any(|&l| l > 3) {
            return Err(Error::InvalidParameter {
                name: "levels",
                reason: "levels must lie in 0..=3".into(),
            });
        }
        Ok(Self { levels, segment_len })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// The 320-feature, 640-bit iris code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrisTemplate {
    levels: Vec<u8>,
    pub subject_id: Option<String>,
    pub eye: Option<Eye>,
}

impl IrisTemplate {
    pub fn new(levels: Vec<u8>) -> Result<Self> {
        if levels.len() != TEMPLATE_LEVELS {
            return Err(Error::TemplateLength {
                found: levels.len(),
                expected: TEMPLATE_LEVELS,
            });
        }
        if levels.iter().any(|&l| l > 3) {
            return Err(Error::InvalidParameter {
                name: "levels",
                reason: "levels must lie in 0..=3".into(),
            });
        }
        Ok(Self {
            levels,
            subject_id: None,
            eye: None,
        })
    }

    pub fn from_code(code: FeatureCode) -> Result<Self> {
        if code.segment_len != TEMPLATE_LEVELS / 2 {
            return Err(Error::TemplateLength {
                found: code.segment_len,
                expected: TEMPLATE_LEVELS / 2,
            });
        }
        Self::new(code.levels)
    }

    pub fn with_label(mut self, subject: impl Into<String>, eye: Option<Eye>) -> Self {
        self.subject_id = Some(subject.into());
        self.eye = eye;
        self
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    /// Two 160-feature halves.
    pub fn code(&self) -> FeatureCode {
        FeatureCode {
            levels: self.levels.clone(),
            segment_len: TEMPLATE_LEVELS / 2,
        }
    }

    /// Feature `k` occupies stream bits `2k` (low bit of the level) and
    /// `2k+1` (high bit); stream bit `b` is bit `b % 8` of byte `b / 8`.
    pub fn pack(&self) -> [u8; TEMPLATE_BYTES] {
        let mut out = [0u8; TEMPLATE_BYTES];
        for (k, &l) in self.levels.iter().enumerate() {
            out[k / 4] |= l << (2 * (k % 4));
        }
        out
    }

    pub fn unpack(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != TEMPLATE_BYTES {
            return Err(Error::TemplateLength {
                found: bytes.len() * 4,
                expected: TEMPLATE_LEVELS,
            });
        }
        let levels = (0..TEMPLATE_LEVELS)
            .map(|k| (bytes[k / 4] >> (2 * (k % 4))) & 0b11)
            .collect();
        Self::new(levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_layout() {
        let mut levels = vec![0u8; TEMPLATE_LEVELS];
        levels[0] = 1;
        levels[1] = 2;
        levels[5] = 3;
        let t = IrisTemplate::new(levels).unwrap();
        let packed = t.pack();
        assert_eq!(packed.len(), 80);
        assert_eq!(packed[0], 0b0000_1001);
        assert_eq!(packed[1], 0b0000_1100);
        assert_eq!(IrisTemplate::unpack(&packed).unwrap(), t);
    }

    #[test]
    fn wrong_lengths() {
        assert!(matches!(IrisTemplate::new(vec![0; 319]), Err(Error::TemplateLength { .. })));
        assert!(IrisTemplate::unpack(&[0; 79]).is_err());
        assert!(IrisTemplate::new(vec![4; 320]).is_err());
        assert!(FeatureCode::new(vec![0; 10], 3).is_err());
    }

    #[test]
    fn eye_parsing() {
        assert_eq!("Left".parse::<Eye>().unwrap(), Eye::Left);
        assert_eq!(Eye::from_byte(Eye::Right.to_byte()), Some(Eye::Right));
        assert!("up".parse::<Eye>().is_err());
    }
}
