use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{gaussian_blur, gaussian_kernel, EdgeMap, GrayImage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    pub sigma: f64,
    pub low_ratio: f64,
    pub high_ratio: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            low_ratio: 0.1,
            high_ratio: 0.2,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be positive, got {}", self.sigma),
            });
        }
        if !(self.low_ratio > 0.0 && self.low_ratio < self.high_ratio && self.high_ratio <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "low_ratio/high_ratio",
                reason: format!(
                    "need 0 < low < high <= 1, got {} / {}",
                    self.low_ratio, self.high_ratio
                ),
            });
        }
        Ok(())
    }
}

/// Sobel responses of the smoothed image.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub magnitude: Vec<f64>,
}

pub fn gradients(smoothed: &GrayImage) -> Gradients {
    let (w, h) = smoothed.dims();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let p = |x: isize, y: isize| smoothed.get_clamped(x, y);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            gx[i] = (p(x + 1, y - 1) + 2.0 * p(x + 1, y) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2.0 * p(x - 1, y) + p(x - 1, y + 1));
            gy[i] = (p(x - 1, y + 1) + 2.0 * p(x, y + 1) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2.0 * p(x, y - 1) + p(x + 1, y - 1));
        }
    }
    let magnitude = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    Gradients {
        width: w,
        height: h,
        gx,
        gy,
        magnitude,
    }
}

/// Thins gradient ridges to one pixel. A pixel survives when its magnitude is
/// strictly above the forward neighbour and not below the backward one along
/// the quantised gradient direction; out-of-range neighbours count as zero.
pub fn non_max_suppression(g: &Gradients) -> Vec<f64> {
    let (w, h) = (g.width, g.height);
    let mag = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            g.magnitude[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = g.magnitude[i];
            if m <= 0.0 {
                continue;
            }
            let mut angle = g.gy[i].atan2(g.gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (dx, dy) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let fwd = mag(xi + dx, yi + dy);
            let bwd = mag(xi - dx, yi - dy);
            if m > fwd && m >= bwd {
                out[i] = m;
            }
        }
    }
    out
}

/// Double-threshold linking: pixels at or above `high` seed edges, which grow
/// through 8-connected pixels at or above `low`.
pub fn hysteresis(thinned: &[f64], width: usize, height: usize, low: f64, high: f64) -> EdgeMap {
    let mut edges = EdgeMap::empty(width, height);
    let mut queue = VecDeque::new();
    for (i, &m) in thinned.iter().enumerate() {
        if m > 0.0 && m >= high {
            edges.set(i % width, i / width, true);
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % width) as isize, (i / width) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                    continue;
                }
                let (ux, uy) = (nx as usize, ny as usize);
                let j = uy * width + ux;
                if !edges.get(ux, uy) && thinned[j] > 0.0 && thinned[j] >= low {
                    edges.set(ux, uy, true);
                    queue.push_back(j);
                }
            }
        }
    }
    edges
}

/// Canny edge detector: gaussian smoothing, Sobel gradients, non-maximum
/// suppression and hysteresis at `low_ratio`/`high_ratio` of the peak
/// gradient magnitude.
pub fn canny(img: &GrayImage, params: &CannyParams) -> Result<EdgeMap> {
    params.validate()?;
    let support = gaussian_kernel(params.sigma).len();
    if img.width() < support || img.height() < support {
        return Err(Error::DegenerateInput {
            width: img.width(),
            height: img.height(),
            support,
        });
    }
    let smoothed = gaussian_blur(img, params.sigma);
    let g = gradients(&smoothed);
    let peak = g.magnitude.iter().copied().fold(0.0, f64::max);
    if peak <= 1e-9 {
        return Ok(EdgeMap::empty(img.width(), img.height()));
    }
    let thinned = non_max_suppression(&g);
    Ok(hysteresis(
        &thinned,
        img.width(),
        img.height(),
        params.low_ratio * peak,
        params.high_ratio * peak,
    ))
}
