//! Analysis filter banks for the supported wavelet families.
//!
//! Tap values are the standard decomposition filters (same ordering as the
//! usual wavelet toolboxes); the invariant and perfect-reconstruction tests
//! below guard them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WaveletFamily {
    Symlet4,
    Daubechies2,
    Coiflet1,
    Biorthogonal55,
    ReverseBiorthogonal22,
}

impl WaveletFamily {
    pub const ALL: [WaveletFamily; 5] = [
        WaveletFamily::Symlet4,
        WaveletFamily::Daubechies2,
        WaveletFamily::Coiflet1,
        WaveletFamily::Biorthogonal55,
        WaveletFamily::ReverseBiorthogonal22,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WaveletFamily::Symlet4 => "symlet4",
            WaveletFamily::Daubechies2 => "daubechies2",
            WaveletFamily::Coiflet1 => "coiflet1",
            WaveletFamily::Biorthogonal55 => "biorthogonal5.5",
            WaveletFamily::ReverseBiorthogonal22 => "reverse-biorthogonal2.2",
        }
    }

    pub fn is_orthogonal(self) -> bool {
        matches!(
            self,
            WaveletFamily::Symlet4 | WaveletFamily::Daubechies2 | WaveletFamily::Coiflet1
        )
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<String> for WaveletFamily {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WaveletFamily> for String {
    fn from(f: WaveletFamily) -> String {
        f.name().to_string()
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "symlet4" | "sym4" => WaveletFamily::Symlet4,
            "daubechies2" | "db2" => WaveletFamily::Daubechies2,
            "coiflet1" | "coif1" => WaveletFamily::Coiflet1,
            "biorthogonal5.5" | "bior5.5" => WaveletFamily::Biorthogonal55,
            "reverse-biorthogonal2.2" | "rbio2.2" => WaveletFamily::ReverseBiorthogonal22,
            _ => return Err(Error::UnknownFamily(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub family: WaveletFamily,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

const SYM4_LO: [f64; 8] = [
    -0.07576571478927333,
    -0.02963552764599851,
    0.49761866763201545,
    0.8037387518059161,
    0.29785779560527736,
    -0.09921954357684722,
    -0.012603967262037833,
    0.0322231006040427,
];

const DB2_LO: [f64; 4] = [
    -0.12940952255126037,
    0.2241438680420134,
    0.8365163037378079,
    0.48296291314453416,
];

const COIF1_LO: [f64; 6] = [
    -0.015655728135791993,
    -0.07273261951252645,
    0.3848648468648578,
    0.8525720202116004,
    0.3378976624574818,
    -0.07273261951252645,
];

const BIOR55_LO: [f64; 12] = [
    0.0,
    0.0,
    0.03968708834740544,
    0.007948108637240322,
    -0.05446378846823691,
    0.34560528195603346,
    0.7366601814282105,
    0.34560528195603346,
    -0.05446378846823691,
    0.007948108637240322,
    0.03968708834740544,
    0.0,
];

const BIOR55_HI: [f64; 12] = [
    -0.013456709459118716,
    -0.002694966880111507,
    0.13670658466432914,
    -0.09350469740093886,
    -0.47680326579848425,
    0.8995061097486484,
    -0.47680326579848425,
    -0.09350469740093886,
    0.13670658466432914,
    -0.002694966880111507,
    -0.013456709459118716,
    0.0,
];

const RBIO22_LO: [f64; 6] = [
    0.0,
    0.0,
    0.3535533905932738,
    std::f64::consts::FRAC_1_SQRT_2,
    0.3535533905932738,
    0.0,
];

const RBIO22_HI: [f64; 6] = [
    0.1767766952966369,
    0.3535533905932738,
    -1.0606601717798212,
    0.3535533905932738,
    0.1767766952966369,
    0.0,
];

/// Quadrature mirror of an orthogonal low-pass: `hi[k] = (-1)^(k+1) lo[L-1-k]`.
fn qmf(lo: &[f64]) -> Vec<f64> {
    let n = lo.len();
    (0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sign * lo[n - 1 - k]
        })
        .collect()
}

pub fn make_filters(family: WaveletFamily) -> FilterPair {
    let (lo, hi) = match family {
        WaveletFamily::Symlet4 => (SYM4_LO.to_vec(), qmf(&SYM4_LO)),
        WaveletFamily::Daubechies2 => (DB2_LO.to_vec(), qmf(&DB2_LO)),
        WaveletFamily::Coiflet1 => (COIF1_LO.to_vec(), qmf(&COIF1_LO)),
        WaveletFamily::Biorthogonal55 => (BIOR55_LO.to_vec(), BIOR55_HI.to_vec()),
        WaveletFamily::ReverseBiorthogonal22 => (RBIO22_LO.to_vec(), RBIO22_HI.to_vec()),
    };
    FilterPair { family, lo, hi }
}

/// Looks up a family by name (`"sym4"`, `"symlet4"`, `"bior5.5"`, ...).
pub fn filters_by_name(name: &str) -> Result<FilterPair> {
    Ok(make_filters(name.parse()?))
}
