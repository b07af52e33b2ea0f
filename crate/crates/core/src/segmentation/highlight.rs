use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Row/column-mean weighted mask: `I_w(i, j) = (a/2)·(S_r(i) + S_c(j))` with
/// `a = a_fraction · mean(img)`.
pub fn weighted_mask(img: &GrayImage, a_fraction: f64) -> GrayImage {
    let (w, h) = img.dims();
    let a = a_fraction * img.mean();
    let row_means: Vec<f64> = (0..h).map(|y| img.row(y).iter().sum::<f64>() / w as f64).collect();
    let mut col_means = vec![0.0; w];
    for y in 0..h {
        for (c, v) in col_means.iter_mut().zip(img.row(y)) {
            *c += v;
        }
    }
    col_means.iter_mut().for_each(|c| *c /= h as f64);
    GrayImage::from_fn(w, h, |x, y| a / 2.0 * (row_means[y] + col_means[x]))
}

/// Adds the mask and saturates everything at or above `threshold`, leaving the
/// dark pupil as the only unsaturated region in a typical eye image.
pub fn highlight_pupil(img: &GrayImage, mask: &GrayImage, threshold: f64) -> Result<GrayImage> {
    if img.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            expected: img.dims(),
            actual: mask.dims(),
        });
    }
    if !(threshold > 200.0 && threshold <= 256.0) {
        return Err(Error::InvalidParameter {
            name: "threshold_t",
            reason: format!("must lie in (200, 256], got {threshold}"),
        });
    }
    let data = img
        .pixels()
        .iter()
        .zip(mask.pixels())
        .map(|(&i, &m)| {
            let n = i + m;
            if n < threshold {
                n
            } else {
                threshold
            }
        })
        .collect();
    GrayImage::new(img.width(), img.height(), data)
}
