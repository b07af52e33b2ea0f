//! Polar unwrapping of the iris annulus and ROI preparation.
//!
//! The strip has 50 radial rows (row 0 at the pupil) and 300 angular
//! columns of 1.2° each. Angles are measured from +x, clockwise on screen
//! (y grows downward), so columns sweep right → down → left → up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::segmentation::IrisGeometry;

pub const STRIP_ROWS: usize = 50;
pub const STRIP_COLS: usize = 300;
pub const ROI_ROWS: usize = 32;
pub const ROI_COLS: usize = 160;
pub const DEGREES_PER_COLUMN: f64 = 360.0 / STRIP_COLS as f64;

/// Dense row-major real matrix. Polar strips, ROIs and wavelet sub-bands all
/// use this layout: rows are radial, columns angular.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                left: rows * cols,
                right: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Column `c` of the result is column `c - s` of the input (mod width).
    pub fn roll_cols(&self, s: isize) -> Matrix {
        let n = self.cols as isize;
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, (c as isize - s).rem_euclid(n) as usize)
        })
    }

    /// Sub-matrix of `nrows × ncols` starting at (`r0`, `c0`); columns wrap.
    pub fn window(&self, r0: usize, nrows: usize, c0: usize, ncols: usize) -> Matrix {
        Matrix::from_fn(nrows, ncols, |r, c| self.get(r0 + r, (c0 + c) % self.cols))
    }

    /// Renders as an image with columns along x.
    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_fn(self.cols, self.rows, |x, y| self.get(y, x))
    }
}

/// Where the ROI sits in the strip, and which preprocessing steps run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    /// First strip column of the ROI window.
    pub roi_start_col: usize,
    pub roi_rows: usize,
    pub roi_cols: usize,
    /// Half-size of the background averaging window.
    pub window: usize,
    /// Fraction of the background removed.
    pub beta: f64,
    pub compress: bool,
    pub histogram_equalize: bool,
    /// Use the whole 50×300 strip as the ROI.
    pub full_iris_roi: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            roi_start_col: 15,
            roi_rows: ROI_ROWS,
            roi_cols: ROI_COLS,
            window: 7,
            beta: 0.9,
            compress: true,
            histogram_equalize: false,
            full_iris_roi: false,
        }
    }
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.window < 1 {
            return bad("window", "must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad("beta", format!("must lie in [0, 1], got {}", self.beta));
        }
        if self.roi_rows == 0 || self.roi_rows > STRIP_ROWS || !self.roi_rows.is_multiple_of(2) {
            return bad("roi_rows", format!("need an even count in 2..={STRIP_ROWS}"));
        }
        if self.roi_cols == 0 || self.roi_cols > STRIP_COLS {
            return bad("roi_cols", format!("need 1..={STRIP_COLS}"));
        }
        if self.roi_start_col >= STRIP_COLS {
            return bad("roi_start_col", format!("need < {STRIP_COLS}"));
        }
        Ok(())
    }
}

/// Rubber-sheet unwrap of the concentric annulus into a 50×300 strip with
/// bilinear sampling at mid-cell radii.
pub fn unwrap(img: &GrayImage, g: &IrisGeometry) -> Result<Matrix> {
    let p = &g.pupil;
    let (w, h) = (img.width() as f64, img.height() as f64);
    if p.cx - g.limbic_r < 0.0 || p.cy - g.limbic_r < 0.0 || p.cx + g.limbic_r > w - 1.0 || p.cy + g.limbic_r > h - 1.0 {
        return Err(Error::AnnulusOutOfBounds);
    }
    let step = (g.limbic_r - p.r) / STRIP_ROWS as f64;
    let trig: Vec<(f64, f64)> = (0..STRIP_COLS)
        .map(|k| {
            let t = (k as f64 * DEGREES_PER_COLUMN).to_radians();
            (t.cos(), t.sin())
        })
        .collect();
    Ok(Matrix::from_fn(STRIP_ROWS, STRIP_COLS, |kr, kt| {
        let rho = p.r + (kr as f64 + 0.5) * step;
        let (c, s) = trig[kt];
        img.sample_bilinear(p.cx + rho * c, p.cy + rho * s)
    }))
}

/// The lower-iris ROI: the innermost `roi_rows` radial rows and `roi_cols`
/// contiguous columns from `roi_start_col` (15..174 by default).
pub fn extract_roi(strip: &Matrix, cfg: &NormalizationConfig) -> Matrix {
    if cfg.full_iris_roi {
        return strip.clone();
    }
    strip.window(0, cfg.roi_rows, cfg.roi_start_col, cfg.roi_cols)
}

/// Background suppression: subtracts `beta` times the mean over a
/// `(2w+1)×(2w+1)` edge-replicated window.
pub fn enhance_roi(roi: &Matrix, w: usize, beta: f64) -> Matrix {
    let img = roi.to_image();
    let bg = crate::image::box_mean(&img, w, w);
    Matrix::from_fn(roi.rows(), roi.cols(), |r, c| roi.get(r, c) - beta * bg.get(c, r))
}

/// Averages each pair of adjacent rows, halving the row count.
pub fn compress_roi(roi: &Matrix) -> Result<Matrix> {
    if !roi.rows().is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "roi",
            reason: format!("odd row count {}", roi.rows()),
        });
    }
    Ok(Matrix::from_fn(roi.rows() / 2, roi.cols(), |a, j| {
        (roi.get(2 * a, j) + roi.get(2 * a + 1, j)) / 2.0
    }))
}

/// Rank-based histogram equalisation onto [0, 255] over 256 bins.
pub fn histogram_equalize(m: &Matrix) -> Matrix {
    let (lo, hi) = m
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        return m.clone();
    }
    let bin = |v: f64| (((v - lo) / (hi - lo)) * 255.0).round() as usize;
    let mut hist = [0usize; 256];
    for &v in m.as_slice() {
        hist[bin(v)] += 1;
    }
    let mut cdf = [0usize; 256];
    let mut acc = 0;
    for (i, h) in hist.iter().enumerate() {
        acc += h;
        cdf[i] = acc;
    }
    let n = m.as_slice().len() as f64;
    let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0) as f64;
    let denom = (n - cdf_min).max(1.0);
    Matrix::from_fn(m.rows(), m.cols(), |r, c| {
        (cdf[bin(m.get(r, c))] as f64 - cdf_min) / denom * 255.0
    })
}

/// Strip → ROI → (equalise) → enhance → (compress), as configured.
pub fn prepare_roi(strip: &Matrix, cfg: &NormalizationConfig) -> Result<RoiStages> {
    cfg.validate()?;
    let roi = extract_roi(strip, cfg);
    let base = if cfg.histogram_equalize {
        histogram_equalize(&roi)
    } else {
        roi.clone()
    };
    let enhanced = enhance_roi(&base, cfg.window, cfg.beta);
    let compressed = if cfg.compress {
        compress_roi(&enhanced)?
    } else {
        enhanced.clone()
    };
    Ok(RoiStages {
        roi,
        enhanced,
        compressed,
    })
}

#[derive(Debug, Clone)]
pub struct RoiStages {
    pub roi: Matrix,
    pub enhanced: Matrix,
    /// Input to the wavelet stage (equals `enhanced` when compression is off).
    pub compressed: Matrix,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::PupilCircle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom() -> IrisGeometry {
        IrisGeometry {
            pupil: PupilCircle { cx: 100.0, cy: 90.0, r: 25.0 },
            limbic_r: 75.0,
        }
    }

    #[test]
    fn radial_image_gives_constant_increasing_rows() {
        let g = geom();
        let img = GrayImage::from_fn(200, 180, |x, y| (x as f64 - 100.0).hypot(y as f64 - 90.0));
        let s = unwrap(&img, &g).unwrap();
        assert_eq!((s.rows(), s.cols()), (STRIP_ROWS, STRIP_COLS));
        let mut prev = f64::MIN;
        for r in 0..STRIP_ROWS {
            let row = s.row(r);
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            // Bilinear interpolation of a cone is exact to well under a pixel.
            assert!(row.iter().all(|v| (v - mean).abs() < 0.5));
            assert!(mean > prev);
            prev = mean;
        }
    }

    #[test]
    fn angular_image_gives_constant_columns() {
        let g = geom();
        // Linear in x along each ray direction is not angular; use a pure
        // function of the angle sampled away from the branch cut.
        let img = GrayImage::from_fn(200, 180, |x, y| {
            let t = (y as f64 - 90.0).atan2(x as f64 - 100.0);
            (3.0 * t).cos() * 50.0 + 100.0
        });
        let s = unwrap(&img, &g).unwrap();
        for c in 0..STRIP_COLS {
            let col: Vec<f64> = (0..STRIP_ROWS).map(|r| s.get(r, c)).collect();
            let spread = col.iter().cloned().fold(f64::MIN, f64::max) - col.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 3.0, "column {c} spread {spread}");
        }
    }

    #[test]
    fn out_of_bounds_annulus() {
        let img = GrayImage::filled(120, 120, 0.0);
        assert!(matches!(unwrap(&img, &geom()), Err(Error::AnnulusOutOfBounds)));
    }

    #[test]
    fn roi_indexing() {
        let strip = Matrix::from_fn(STRIP_ROWS, STRIP_COLS, |_, c| c as f64);
        let roi = extract_roi(&strip, &NormalizationConfig::default());
        assert_eq!((roi.rows(), roi.cols()), (32, 160));
        assert_eq!(roi.get(0, 0), 15.0);
        assert_eq!(roi.get(31, 159), 174.0);
        let strip = Matrix::from_fn(STRIP_ROWS, STRIP_COLS, |r, _| r as f64);
        let roi = extract_roi(&strip, &NormalizationConfig::default());
        assert!((0..32).all(|r| roi.get(r, 77) == r as f64));
    }

    #[test]
    fn enhance_constant() {
        let roi = Matrix::from_fn(32, 160, |_, _| 50.0);
        let out = enhance_roi(&roi, 7, 0.9);
        assert!(out.as_slice().iter().all(|v| (v - 5.0).abs() < 1e-9));
        let out = enhance_roi(&roi, 7, 1.0);
        assert!(out.as_slice().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn enhance_impulse_against_direct_window() {
        let mut roi = Matrix::from_fn(32, 160, |_, _| 10.0);
        roi.set(16, 80, 110.0);
        let out = enhance_roi(&roi, 7, 0.9);
        let n = 15.0 * 15.0;
        // Centre: 110 - 0.9·(10 + 100/225).
        assert!((out.get(16, 80) - (110.0 - 0.9 * (10.0 + 100.0 / n))).abs() < 1e-9);
        // Impulse amplitude above the surround keeps 1 - beta/(2w+1)² of itself.
        let amp = out.get(16, 80) - out.get(16, 100);
        assert!((amp - 100.0 * (1.0 - 0.9 / n)).abs() < 1e-9);
        // Inside the window the surround dips by 0.9·100/225.
        assert!((out.get(16, 84) - (10.0 - 0.9 * (10.0 + 100.0 / n))).abs() < 1e-9);
    }

    #[test]
    fn enhance_keeps_high_frequencies() {
        let roi = Matrix::from_fn(32, 160, |_, c| 100.0 + 20.0 * (c as f64 * std::f64::consts::FRAC_PI_2).sin());
        let out = enhance_roi(&roi, 7, 0.9);
        let row = out.row(16);
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        let amp = row[20..140].iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        assert!(amp > 0.8 * 20.0, "amplitude {amp}");
    }

    #[test]
    fn compress_pairs() {
        let roi = Matrix::from_fn(32, 160, |r, _| if r % 2 == 0 { 2.0 } else { 4.0 });
        let c = compress_roi(&roi).unwrap();
        assert_eq!((c.rows(), c.cols()), (16, 160));
        assert!(c.as_slice().iter().all(|&v| v == 3.0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let roi = Matrix::from_fn(32, 160, |_, _| rng.random_range(-50.0..50.0));
        let c = compress_roi(&roi).unwrap();
        for a in 0..16 {
            for j in 0..160 {
                assert_eq!(c.get(a, j), (roi.get(2 * a, j) + roi.get(2 * a + 1, j)) / 2.0);
            }
        }
        for j in 0..160 {
            let before: f64 = (0..32).map(|r| roi.get(r, j)).sum::<f64>() / 32.0;
            let after: f64 = (0..16).map(|r| c.get(r, j)).sum::<f64>() / 16.0;
            assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn roll_cols_wraps() {
        let m = Matrix::from_fn(2, 5, |_, c| c as f64);
        let r = m.roll_cols(2);
        assert_eq!(r.row(0), &[3.0, 4.0, 0.0, 1.0, 2.0]);
    }
}
