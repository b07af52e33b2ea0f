//! Undecimated (à trous) 2-D wavelet decomposition.
//!
//! Each level filters along the angular axis (matrix columns index, periodic
//! extension) and then along the radial axis (matrix rows index, symmetric
//! extension). Level `j` dilates the taps by `2^(j-1)`; nothing is
//! downsampled, so every sub-band has the input's shape.
//!
//! Alignment: tap `k` of a length-`L` filter sits at offset `d·(k - L/2)`,
//! i.e. `y[n] = Σ_k h[k]·x[n - d·(k - L/2)]`. An impulse at `n0` therefore
//! produces `h[k]` at `n0 + d·(k - L/2)`.

use serde::{Deserialize, Serialize};

use super::filters::FilterPair;
use crate::error::{Error, Result};
use crate::normalization::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SwtLevel {
    pub ca: Matrix,
    pub ch: Matrix,
    pub cv: Matrix,
    pub cd: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    Ca,
    Ch,
    Cv,
    Cd,
}

impl SwtLevel {
    pub fn band(&self, b: Band) -> &Matrix {
        match b {
            Band::Ca => &self.ca,
            Band::Ch => &self.ch,
            Band::Cv => &self.cv,
            Band::Cd => &self.cd,
        }
    }
}

/// Half-sample symmetric index folding (`x[-1] = x[0]`); valid for any offset.
#[inline]
fn symmetric(i: isize, n: usize) -> usize {
    let p = 2 * n as isize;
    let m = i.rem_euclid(p);
    if m < n as isize {
        m as usize
    } else {
        (p - 1 - m) as usize
    }
}

/// Filters every row along its columns (angular axis), wrapping around.
fn filter_angular(m: &Matrix, taps: &[f64], dilation: usize) -> Matrix {
    let n = m.cols() as isize;
    let center = (taps.len() / 2) as isize;
    let d = dilation as isize;
    Matrix::from_fn(m.rows(), m.cols(), |r, c| {
        let row = m.row(r);
        taps.iter()
            .enumerate()
            .map(|(k, h)| h * row[(c as isize - d * (k as isize - center)).rem_euclid(n) as usize])
            .sum()
    })
}

/// Filters every column along its rows (radial axis), mirroring at the ends.
fn filter_radial(m: &Matrix, taps: &[f64], dilation: usize) -> Matrix {
    let n = m.rows();
    let center = (taps.len() / 2) as isize;
    let d = dilation as isize;
    Matrix::from_fn(m.rows(), m.cols(), |r, c| {
        taps.iter()
            .enumerate()
            .map(|(k, h)| h * m.get(symmetric(r as isize - d * (k as isize - center), n), c))
            .sum()
    })
}

/// One decomposition level at the given dilation.
pub fn swt2_level(m: &Matrix, f: &FilterPair, dilation: usize) -> SwtLevel {
    let lo = filter_angular(m, &f.lo, dilation);
    let hi = filter_angular(m, &f.hi, dilation);
    SwtLevel {
        ca: filter_radial(&lo, &f.lo, dilation),
        ch: filter_radial(&lo, &f.hi, dilation),
        cv: filter_radial(&hi, &f.lo, dilation),
        cd: filter_radial(&hi, &f.hi, dilation),
    }
}

/// `levels`-deep decomposition; entry `j-1` holds level `j`, and the
/// approximation of each level feeds the next.
pub fn swt2(m: &Matrix, f: &FilterPair, levels: usize) -> Result<Vec<SwtLevel>> {
    if levels == 0 {
        return Err(Error::InvalidParameter {
            name: "levels",
            reason: "need at least one level".into(),
        });
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::MatrixTooSmall {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let mut out: Vec<SwtLevel> = Vec::with_capacity(levels);
    for j in 0..levels {
        let input = out.last().map(|l| &l.ca).unwrap_or(m);
        let level = swt2_level(input, f, 1 << j);
        out.push(level);
    }
    Ok(out)
}
