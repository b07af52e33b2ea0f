//! Wavelet features and the 2-bit iris code.
//!
//! The compressed 16×160 ROI is decomposed with a two-level undecimated
//! transform; the selected sub-bands (ca2 and cv2 by default) contribute
//! their first row, and each 160-feature segment is quantised to 2 bits
//! per feature.

mod filters;
mod swt;
mod template;

pub use filters::{filters_by_name, make_filters, FilterPair, WaveletFamily};
pub use swt::{swt2, swt2_level, Band, SwtLevel};
pub use template::{Eye, FeatureCode, IrisTemplate, TEMPLATE_BYTES, TEMPLATE_LEVELS};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalization::Matrix;

/// Ordered list of `(band, level)` sub-bands, written like `ca2cv2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Selection(pub Vec<(Band, usize)>);

/// Every coefficient combination of the wavelet screening table.
pub const SELECTION_TABLE: [&str; 16] = [
    "ca2cv2ch2cd2",
    "ca2cv2ch2",
    "ca2cv2cd2",
    "ca2cv2",
    "ca2ch2",
    "ca2cd2",
    "ca2",
    "ca1cv1ch1cd1",
    "ca1cv1ch1",
    "ca1cv1cd1",
    "ca1cv1",
    "ca1ch1cd1",
    "ca1ch1",
    "ca1cd1",
    "ca1",
    "ca2cd2ch2",
];

impl Selection {
    pub fn deepest_level(&self) -> usize {
        self.0.iter().map(|&(_, l)| l).max().unwrap_or(0)
    }
}

impl Default for Selection {
    fn default() -> Self {
        Selection(vec![(Band::Ca, 2), (Band::Cv, 2)])
    }
}

impl FromStr for Selection {
    type Err = Error;

    /// Case-insensitive; tokens are a band name followed by a level number.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownSelection(s.to_string());
        let lower = s.to_ascii_lowercase();
        let mut rest = lower.as_str();
        let mut out = Vec::new();
        while !rest.is_empty() {
            if rest.len() < 3 {
                return Err(unknown());
            }
            let band = match &rest[..2] {
                "ca" => Band::Ca,
                "ch" => Band::Ch,
                "cv" => Band::Cv,
                "cd" => Band::Cd,
                _ => return Err(unknown()),
            };
            let digits = rest[2..].bytes().take_while(|b| b.is_ascii_digit()).count();
            let level: usize = rest[2..2 + digits].parse().map_err(|_| unknown())?;
            if level == 0 || out.contains(&(band, level)) {
                return Err(unknown());
            }
            out.push((band, level));
            rest = &rest[2 + digits..];
        }
        if out.is_empty() {
            return Err(unknown());
        }
        Ok(Selection(out))
    }
}

impl TryFrom<String> for Selection {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Selection> for String {
    fn from(s: Selection) -> String {
        s.to_string()
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (band, level) in &self.0 {
            let name = match band {
                Band::Ca => "ca",
                Band::Ch => "ch",
                Band::Cv => "cv",
                Band::Cd => "cd",
            };
            write!(f, "{name}{level}")?;
        }
        Ok(())
    }
}

/// The named sub-bands, in the order they appear in the selection.
pub fn select_features<'a>(dec: &'a [SwtLevel], selection: &Selection) -> Result<Vec<&'a Matrix>> {
    selection
        .0
        .iter()
        .map(|&(band, level)| {
            dec.get(level - 1)
                .map(|l| l.band(band))
                .ok_or(Error::LevelUnavailable {
                    requested: level,
                    available: dec.len(),
                })
        })
        .collect()
}

/// Concatenates row 0 of each matrix.
pub fn first_row_reduce(mats: &[&Matrix]) -> Vec<f64> {
    mats.iter().flat_map(|m| m.row(0).iter().copied()).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Two bits per feature, per segment: `level = 2·[x ≥ 0] + [|x| > m]` where
/// `m` is the median magnitude of the segment (mean of the two middle values
/// for even lengths). The strict magnitude test sends an all-zero segment to
/// level 2.
pub fn quantize_2bit(v: &[f64], segment_len: usize) -> Result<FeatureCode> {
    if v.is_empty() || segment_len == 0 || !v.len().is_multiple_of(segment_len) {
        return Err(Error::InvalidParameter {
            name: "segment_len",
            reason: format!("{} features do not split into segments of {segment_len}", v.len()),
        });
    }
    let mut levels = Vec::with_capacity(v.len());
    for seg in v.chunks(segment_len) {
        let m = median(seg.iter().map(|x| x.abs()).collect());
        levels.extend(seg.iter().map(|&x| 2 * u8::from(x >= 0.0) + u8::from(x.abs() > m)));
    }
    FeatureCode::new(levels, segment_len)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub family: WaveletFamily,
    pub selection: Selection,
    pub levels: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            family: WaveletFamily::Symlet4,
            selection: Selection::default(),
            levels: 2,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidParameter {
                name: "levels",
                reason: "need at least one level".into(),
            });
        }
        if self.selection.deepest_level() > self.levels {
            return Err(Error::LevelUnavailable {
                requested: self.selection.deepest_level(),
                available: self.levels,
            });
        }
        Ok(())
    }
}

/// Wavelet decomposition → selection → first-row reduction → quantisation.
pub fn encode_features(input: &Matrix, cfg: &FeatureConfig) -> Result<FeatureCode> {
    cfg.validate()?;
    let dec = swt2(input, &make_filters(cfg.family), cfg.levels)?;
    let mats = select_features(&dec, &cfg.selection)?;
    let v = first_row_reduce(&mats);
    quantize_2bit(&v, input.cols())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_every_table_entry() {
        for name in SELECTION_TABLE {
            let sel: Selection = name.parse().unwrap();
            assert_eq!(sel.to_string(), name);
        }
        let sel: Selection = "Ca2cv2".parse().unwrap();
        assert_eq!(sel, Selection::default());
        for bad in ["", "ca", "cx2", "ca0", "ca2ca2", "ca2 cv2"] {
            assert!(matches!(bad.parse::<Selection>(), Err(Error::UnknownSelection(_))), "{bad}");
        }
    }

    #[test]
    fn selection_order_and_levels() {
        let m = Matrix::from_fn(16, 160, |r, c| (r * 7 + c) as f64);
        let dec = swt2(&m, &make_filters(WaveletFamily::Symlet4), 2).unwrap();
        let mats = select_features(&dec, &"ca2cv2".parse().unwrap()).unwrap();
        assert_eq!(mats[0], &dec[1].ca);
        assert_eq!(mats[1], &dec[1].cv);
        let mats = select_features(&dec, &"ca1".parse().unwrap()).unwrap();
        assert_eq!(mats, vec![&dec[0].ca]);
        assert!(matches!(
            select_features(&dec, &"ca3".parse().unwrap()),
            Err(Error::LevelUnavailable { requested: 3, available: 2 })
        ));
    }

    #[test]
    fn reduce_concatenates_first_rows() {
        let a = Matrix::from_fn(16, 160, |r, c| (r * 1000 + c) as f64);
        let b = Matrix::from_fn(16, 160, |r, c| -((r * 1000 + c) as f64));
        let v = first_row_reduce(&[&a, &b]);
        assert_eq!(v.len(), 320);
        assert_eq!(&v[..160], a.row(0));
        assert_eq!(&v[160..], b.row(0));
        assert_eq!(first_row_reduce(&[&a]).len(), 160);
    }

    #[test]
    fn quantize_rule() {
        let code = quantize_2bit(&[-3.0, -1.0, 1.0, 3.0], 4).unwrap();
        assert_eq!(code.levels, vec![1, 0, 2, 3]);
        let code = quantize_2bit(&[0.0; 8], 4).unwrap();
        assert!(code.levels.iter().all(|&l| l == 2));
        assert!(quantize_2bit(&[1.0; 5], 4).is_err());
    }
}
