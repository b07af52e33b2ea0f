use super::PupilCircle;
use crate::image::GrayImage;

/// Mean intensity over the axis-aligned square inscribed in the pupil circle
/// (half-side `r/√2`), clipped to the raster.
pub fn pupil_mean(img: &GrayImage, c: &PupilCircle) -> f64 {
    let half = c.r / std::f64::consts::SQRT_2;
    let x0 = (c.cx - half).ceil().max(0.0) as usize;
    let x1 = (c.cx + half).floor().min(img.width() as f64 - 1.0) as isize;
    let y0 = (c.cy - half).ceil().max(0.0) as usize;
    let y1 = (c.cy + half).floor().min(img.height() as f64 - 1.0) as isize;
    let mut sum = 0.0;
    let mut n = 0usize;
    for y in y0 as isize..=y1 {
        for x in x0 as isize..=x1 {
            sum += img.get(x as usize, y as usize);
            n += 1;
        }
    }
    if n == 0 {
        img.get_clamped(c.cx.round() as isize, c.cy.round() as isize)
    } else {
        sum / n as f64
    }
}

/// Replaces every pixel strictly inside the circle by `scale` times the
/// inscribed-square mean, erasing specular highlights inside the pupil.
pub fn fill_pupil(img: &GrayImage, c: &PupilCircle, scale: f64) -> GrayImage {
    let value = scale * pupil_mean(img, c);
    let mut out = img.clone();
    let x0 = (c.cx - c.r).floor().max(0.0) as usize;
    let x1 = ((c.cx + c.r).ceil() as usize).min(img.width() - 1);
    let y0 = (c.cy - c.r).floor().max(0.0) as usize;
    let y1 = ((c.cy + c.r).ceil() as usize).min(img.height() - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            if (x as f64 - c.cx).hypot(y as f64 - c.cy) < c.r {
                out.set(x, y, value);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOutcome {
    pub circle: PupilCircle,
    pub iterations: usize,
    /// False when the iteration cap was hit before a fixed point.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineParams {
    pub max_iters: usize,
    /// Intensity margin above the pupil mean that counts as "brighter".
    pub margin: f64,
    pub adjust_radius: bool,
}

impl Default for RefineParams {
    fn default() -> Self {
        Self {
            max_iters: 10,
            margin: 20.0,
            adjust_radius: true,
        }
    }
}

#[derive(Clone, Copy)]
enum Dir {
    Up,
    Down,
    Left,
    Right,
}

impl Dir {
    fn angle(self) -> f64 {
        match self {
            Dir::Right => 0.0,
            Dir::Down => 90.0,
            Dir::Left => 180.0,
            Dir::Up => 270.0,
        }
    }
}

/// Median intensity along a short arc (±15°) at radius `rho` facing `dir`.
fn arc_median(img: &GrayImage, c: &PupilCircle, rho: f64, dir: Dir) -> f64 {
    let mut v: Vec<f64> = (-15..=15)
        .step_by(3)
        .map(|d| {
            let t = (dir.angle() + d as f64).to_radians();
            img.sample_bilinear(c.cx + rho * t.cos(), c.cy + rho * t.sin())
        })
        .collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Four-direction boundary correction.
///
/// On each axis, if the inner rim on one side is brighter than the pupil
/// while the outer rim on the opposite side is still pupil-dark, the circle
/// moves one pixel toward that opposite side. With `adjust_radius`, both
/// inner rims of an axis bright shrinks the radius by one; both outer rims
/// dark grows it. Stops at a fixed point or after `max_iters` steps; the
/// circle is kept inside the raster throughout.
pub fn refine_pupil(img: &GrayImage, c: &PupilCircle, pupil_mean: f64, params: &RefineParams) -> RefineOutcome {
    let level = pupil_mean + params.margin;
    let mut cur = *c;
    for it in 0..params.max_iters {
        let inner = |d| arc_median(img, &cur, cur.r - 1.0, d) > level;
        let outer = |d| arc_median(img, &cur, cur.r + 1.0, d) < level;
        let (iu, id, il, ir) = (inner(Dir::Up), inner(Dir::Down), inner(Dir::Left), inner(Dir::Right));
        let (ou, od, ol, or) = (outer(Dir::Up), outer(Dir::Down), outer(Dir::Left), outer(Dir::Right));

        let mut next = cur;
        if iu && od {
            next.cy += 1.0;
        } else if id && ou {
            next.cy -= 1.0;
        }
        if il && or {
            next.cx += 1.0;
        } else if ir && ol {
            next.cx -= 1.0;
        }
        if params.adjust_radius && next.cx == cur.cx && next.cy == cur.cy {
            if (iu && id) || (il && ir) {
                next.r -= 1.0;
            } else if (ou && od) || (ol && or) {
                next.r += 1.0;
            }
        }
        next = next.clamped_into(img.width(), img.height());
        if next == cur {
            return RefineOutcome {
                circle: cur,
                iterations: it,
                converged: true,
            };
        }
        cur = next;
    }
    RefineOutcome {
        circle: cur,
        iterations: params.max_iters,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(cx: f64, cy: f64, r: f64) -> GrayImage {
        GrayImage::from_fn(200, 200, |x, y| {
            if (x as f64 - cx).hypot(y as f64 - cy) < r {
                30.0
            } else {
                120.0
            }
        })
    }

    #[test]
    fn exact_boundary_is_fixed_point() {
        let img = disc(100.0, 100.0, 25.0);
        let c = PupilCircle { cx: 100.0, cy: 100.0, r: 25.0 };
        let out = refine_pupil(&img, &c, 30.0, &RefineParams::default());
        assert!(out.converged);
        assert_eq!(out.circle, c);
    }

    #[test]
    fn shifted_estimate_moves_back() {
        let img = disc(100.0, 100.0, 25.0);
        let c = PupilCircle { cx: 100.0, cy: 96.0, r: 25.0 };
        let out = refine_pupil(&img, &c, 30.0, &RefineParams::default());
        assert!((out.circle.cy - 100.0).abs() <= 1.0, "{:?}", out);
        assert!((out.circle.cx - 100.0).abs() <= 1.0);
    }

    #[test]
    fn small_radius_grows() {
        let img = disc(100.0, 100.0, 25.0);
        let c = PupilCircle { cx: 100.0, cy: 100.0, r: 23.0 };
        let out = refine_pupil(&img, &c, 30.0, &RefineParams::default());
        assert!([24.0, 25.0, 26.0].contains(&out.circle.r), "{:?}", out);
    }

    #[test]
    fn fill_removes_speculars() {
        let mut img = disc(100.0, 100.0, 25.0);
        img.set(95, 98, 255.0);
        img.set(104, 101, 255.0);
        img.set(100, 100, 255.0);
        let c = PupilCircle { cx: 100.0, cy: 100.0, r: 25.0 };
        let half = (25.0f64 / 2f64.sqrt()).floor() as i64;
        let mut sum = 0.0;
        let mut n = 0.0;
        for y in 100 - half..=100 + half {
            for x in 100 - half..=100 + half {
                sum += img.get(x as usize, y as usize);
                n += 1.0;
            }
        }
        let expect = sum / n;
        let out = fill_pupil(&img, &c, 1.0);
        assert!(expect > 30.0);
        for y in 0..200 {
            for x in 0..200 {
                let d = (x as f64 - 100.0).hypot(y as f64 - 100.0);
                if d < 25.0 {
                    assert!((out.get(x, y) - expect).abs() < 1e-9);
                } else {
                    assert_eq!(out.get(x, y), img.get(x, y));
                }
            }
        }
    }

    #[test]
    fn fill_on_constant_is_identity() {
        let img = GrayImage::filled(50, 50, 64.0);
        let c = PupilCircle { cx: 25.0, cy: 25.0, r: 10.0 };
        assert_eq!(fill_pupil(&img, &c, 1.0), img);
    }

    #[test]
    fn pixel_on_radius_untouched() {
        let mut img = GrayImage::filled(50, 50, 10.0);
        img.set(35, 25, 200.0); // exactly r = 10 from the centre
        let c = PupilCircle { cx: 25.0, cy: 25.0, r: 10.0 };
        let out = fill_pupil(&img, &c, 1.0);
        assert_eq!(out.get(35, 25), 200.0);
    }
}
