use super::GrayImage;

/// Mean over a `(2·half_h+1) × (2·half_w+1)` window centred on each pixel,
/// with edge replication at the border.
pub fn box_mean(img: &GrayImage, half_h: usize, half_w: usize) -> GrayImage {
    let (w, h) = img.dims();
    let hw = half_w as isize;
    let hh = half_h as isize;

    // Horizontal pass, then vertical; both on replicated coordinates.
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for dx in -hw..=hw {
                s += img.get_clamped(x as isize + dx, y as isize);
            }
            rows[y * w + x] = s;
        }
    }
    let norm = ((2 * half_h + 1) * (2 * half_w + 1)) as f64;
    GrayImage::from_fn(w, h, |x, y| {
        let mut s = 0.0;
        for dy in -hh..=hh {
            let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
            s += rows[yy * w + x];
        }
        s / norm
    })
}

/// Gaussian taps truncated at ±3σ and renormalised to unit sum.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable gaussian blur with edge replication.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> GrayImage {
    let taps = gaussian_kernel(sigma);
    let r = (taps.len() / 2) as isize;
    let (w, h) = img.dims();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for (k, t) in taps.iter().enumerate() {
                s += t * img.get_clamped(x as isize + k as isize - r, y as isize);
            }
            tmp[y * w + x] = s;
        }
    }
    GrayImage::from_fn(w, h, |x, y| {
        let mut s = 0.0;
        for (k, t) in taps.iter().enumerate() {
            let yy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
            s += t * tmp[yy * w + x];
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_box(img: &GrayImage, hh: isize, hw: isize) -> GrayImage {
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            let mut s = 0.0;
            let mut n = 0.0;
            for dy in -hh..=hh {
                for dx in -hw..=hw {
                    s += img.get_clamped(x as isize + dx, y as isize + dy);
                    n += 1.0;
                }
            }
            s / n
        })
    }

    #[test]
    fn constant_stays_constant() {
        let img = GrayImage::filled(9, 7, 42.5);
        let out = box_mean(&img, 3, 2);
        assert!(out.pixels().iter().all(|&v| (v - 42.5).abs() < 1e-12));
    }

    #[test]
    fn impulse_response_is_one_ninth() {
        let mut img = GrayImage::filled(9, 9, 0.0);
        img.set(4, 4, 1.0);
        let out = box_mean(&img, 1, 1);
        for y in 0..9 {
            for x in 0..9 {
                let expect = if (3..=5).contains(&x) && (3..=5).contains(&y) { 1.0 / 9.0 } else { 0.0 };
                assert!((out.get(x, y) - expect).abs() < 1e-15, "({x},{y})");
            }
        }
    }

    #[test]
    fn matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let img = GrayImage::from_fn(16, 16, |_, _| rng.random_range(0.0..255.0));
            let fast = box_mean(&img, 3, 3);
            let slow = naive_box(&img, 3, 3);
            for (a, b) in fast.pixels().iter().zip(slow.pixels()) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!(fast.min() >= img.min() - 1e-12);
            assert!(fast.max() <= img.max() + 1e-12);
        }
    }

    #[test]
    fn gaussian_kernel_unit_sum() {
        for s in [0.5, 1.0, 1.7, 3.0] {
            let k = gaussian_kernel(s);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(k.len(), 2 * (3.0 * s).ceil() as usize + 1);
        }
    }
}
