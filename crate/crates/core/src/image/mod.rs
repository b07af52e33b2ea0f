//! Raster containers and the low-level kernels every later stage consumes.
//!
//! Intensities are kept as `f64` so intermediate sums (mask + image) can
//! exceed 255 before any clamp is applied. All spatial filters replicate the
//! border pixel.

mod canny;
mod filter;
mod io;

pub use canny::{canny, gradients, hysteresis, non_max_suppression, CannyParams, Gradients};
pub use filter::{box_mean, gaussian_blur, gaussian_kernel};
pub use io::{decode_bmp, decode_pgm, encode_pgm, load_gray, write_pgm};

use crate::error::{Error, Result};

/// A single-channel raster with real-valued intensities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: (data.len(), 1),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "intensities",
                reason: "non-finite intensity".into(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constant image. Panics on a zero dimension.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image from `f(x, y)`. Panics on a zero dimension.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    /// Bilinear sample at sub-pixel position; pixel centres sit on integer
    /// coordinates. Positions outside the raster replicate the border.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (xi, yi) = (x0 as isize, y0 as isize);
        let p00 = self.get_clamped(xi, yi);
        let p10 = self.get_clamped(xi + 1, yi);
        let p01 = self.get_clamped(xi, yi + 1);
        let p11 = self.get_clamped(xi + 1, yi + 1);
        let top = p00 + (p10 - p00) * fx;
        let bottom = p01 + (p11 - p01) * fx;
        top + (bottom - top) * fy
    }

    pub fn pixels(&self) -> &[f64] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn rotate180(&self) -> GrayImage {
        let mut data = self.data.clone();
        data.reverse();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Linear rescale of the value range onto [0, 255] (for debug dumps).
    pub fn normalized_for_display(&self) -> GrayImage {
        let (lo, hi) = (self.min(), self.max());
        if hi - lo < 1e-12 {
            return self.map(|_| 0.0);
        }
        self.map(|v| (v - lo) / (hi - lo) * 255.0)
    }
}

/// Binary edge raster with the dimensions of its source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    edges: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            edges: vec![false; width * height],
        }
    }

    pub fn from_points(width: usize, height: usize, points: &[(usize, usize)]) -> Self {
        let mut map = Self::empty(width, height);
        for &(x, y) in points {
            map.set(x, y, true);
        }
        map
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.edges[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.edges[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Edge pixel coordinates in raster order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    pub fn rotate180(&self) -> EdgeMap {
        let mut edges = self.edges.clone();
        edges.reverse();
        EdgeMap {
            width: self.width,
            height: self.height,
            edges,
        }
    }

    /// 8-connected components, largest first; ties keep raster order of the
    /// first pixel.
    pub fn components(&self) -> Vec<Vec<(usize, usize)>> {
        let mut label = vec![false; self.edges.len()];
        let mut comps = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.edges.len() {
            if !self.edges[start] || label[start] {
                continue;
            }
            label[start] = true;
            stack.push(start);
            let mut comp = Vec::new();
            while let Some(i) = stack.pop() {
                let (x, y) = (i % self.width, i / self.width);
                comp.push((x, y));
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let nx = x as isize + dx;
                        let ny = y as isize + dy;
                        if nx < 0 || ny < 0 || nx >= self.width as isize || ny >= self.height as isize {
                            continue;
                        }
                        let j = ny as usize * self.width + nx as usize;
                        if self.edges[j] && !label[j] {
                            label[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
            comp.sort_by_key(|&(x, y)| (y, x));
            comps.push(comp);
        }
        comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
        comps
    }

    /// Renders edges as 0/255 intensities.
    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| if self.get(x, y) { 255.0 } else { 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dims_and_nan() {
        assert!(GrayImage::new(0, 3, vec![]).is_err());
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn bilinear_hits_pixel_centres() {
        let img = GrayImage::from_fn(4, 3, |x, y| (x + 10 * y) as f64);
        assert_eq!(img.sample_bilinear(2.0, 1.0), 12.0);
        assert!((img.sample_bilinear(2.5, 1.5) - 17.5).abs() < 1e-12);
    }

    #[test]
    fn components_sorted_by_size() {
        let map = EdgeMap::from_points(10, 10, &[(0, 0), (1, 1), (2, 2), (8, 8)]);
        let comps = map.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 3);
    }
}
