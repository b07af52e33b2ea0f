use super::PupilCircle;
use crate::error::{Error, Result};
use crate::image::EdgeMap;

/// A point in image coordinates (x rightward, y downward).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

const PARALLEL_EPS: f64 = 1e-9;

/// Intersection of the perpendicular bisectors of chords `p1p2` and `p3p4`.
///
/// Solved in vector form so vertical bisectors need no special slope case;
/// the bisectors are rejected as parallel when the sine of the angle between
/// their unit directions falls below 1e-9.
pub fn chord_center(p1: Point, p2: Point, p3: Point, p4: Point) -> Result<Point> {
    let (d1x, d1y) = (p2.x - p1.x, p2.y - p1.y);
    let (d2x, d2y) = (p4.x - p3.x, p4.y - p3.y);
    let n1 = d1x.hypot(d1y);
    let n2 = d2x.hypot(d2y);
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::InvalidParameter {
            name: "chord",
            reason: "chord endpoints coincide".into(),
        });
    }
    // Bisector k: points q with d_k · q = d_k · m_k.
    let c1 = d1x * (p1.x + p2.x) / 2.0 + d1y * (p1.y + p2.y) / 2.0;
    let c2 = d2x * (p3.x + p4.x) / 2.0 + d2y * (p3.y + p4.y) / 2.0;
    let det = d1x * d2y - d1y * d2x;
    if (det / (n1 * n2)).abs() < PARALLEL_EPS {
        return Err(Error::ParallelBisectors);
    }
    Ok(Point::new((c1 * d2y - c2 * d1y) / det, (d1x * c2 - d2x * c1) / det))
}

/// Picks the middle pixel of a run of tied extreme pixels.
fn middle<T: Copy>(mut v: Vec<T>, key: impl Fn(&T) -> usize) -> T {
    v.sort_by_key(|p| key(p));
    v[v.len() / 2]
}

/// The five boundary points used for the circle fit: leftmost, rightmost,
/// topmost, bottommost, and the pixel whose bearing from the component
/// centroid is closest to 45° (down-right in image coordinates).
pub fn boundary_points(component: &[(usize, usize)]) -> Vec<Point> {
    let min_x = component.iter().map(|p| p.0).min().unwrap();
    let max_x = component.iter().map(|p| p.0).max().unwrap();
    let min_y = component.iter().map(|p| p.1).min().unwrap();
    let max_y = component.iter().map(|p| p.1).max().unwrap();
    let pick = |pred: &dyn Fn(&(usize, usize)) -> bool, by_y: bool| {
        let run: Vec<(usize, usize)> = component.iter().copied().filter(|p| pred(p)).collect();
        middle(run, |p| if by_y { p.1 } else { p.0 })
    };
    let left = pick(&|p| p.0 == min_x, true);
    let right = pick(&|p| p.0 == max_x, true);
    let top = pick(&|p| p.1 == min_y, false);
    let bottom = pick(&|p| p.1 == max_y, false);

    let n = component.len() as f64;
    let gx = component.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let gy = component.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let target = std::f64::consts::FRAC_PI_4;
    let diag = component
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = ((a.1 as f64 - gy).atan2(a.0 as f64 - gx) - target).abs();
            let db = ((b.1 as f64 - gy).atan2(b.0 as f64 - gx) - target).abs();
            da.total_cmp(&db)
        })
        .unwrap();

    let mut pts: Vec<(usize, usize)> = Vec::with_capacity(5);
    for p in [left, right, top, bottom, diag] {
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts.into_iter().map(|(x, y)| Point::new(x as f64, y as f64)).collect()
}

/// Bisector pairs meeting at less than this sine are too ill-conditioned for
/// pixel-quantised points and are discarded.
const MIN_BISECTOR_SINE: f64 = 0.1;

/// Circle estimate from the largest connected edge component.
///
/// Every pair of chords between the five boundary points contributes one
/// bisector intersection; ill-conditioned pairs and intersections outside the
/// component's bounding box are discarded, and the survivors are averaged.
/// The radius is the mean distance from that centre to the five points.
pub fn estimate_pupil(edges: &EdgeMap) -> Result<PupilCircle> {
    let comps = edges.components();
    let largest = comps.first().map(|c| c.len()).unwrap_or(0);
    if largest < 5 {
        return Err(Error::TooFewEdgePoints {
            found: largest,
            needed: 5,
        });
    }
    let comp = &comps[0];
    let pts = boundary_points(comp);
    let (min_x, max_x) = (
        comp.iter().map(|p| p.0).min().unwrap() as f64,
        comp.iter().map(|p| p.0).max().unwrap() as f64,
    );
    let (min_y, max_y) = (
        comp.iter().map(|p| p.1).min().unwrap() as f64,
        comp.iter().map(|p| p.1).max().unwrap() as f64,
    );

    let mut chords = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            chords.push((pts[i], pts[j]));
        }
    }
    let mut centers = Vec::new();
    for a in 0..chords.len() {
        for b in a + 1..chords.len() {
            let ((p1, p2), (p3, p4)) = (chords[a], chords[b]);
            let (d1x, d1y) = (p2.x - p1.x, p2.y - p1.y);
            let (d2x, d2y) = (p4.x - p3.x, p4.y - p3.y);
            let sine = (d1x * d2y - d1y * d2x).abs() / (d1x.hypot(d1y) * d2x.hypot(d2y));
            if sine < MIN_BISECTOR_SINE {
                continue;
            }
            if let Ok(c) = chord_center(p1, p2, p3, p4) {
                if c.x >= min_x && c.x <= max_x && c.y >= min_y && c.y <= max_y {
                    centers.push(c);
                }
            }
        }
    }
    if centers.is_empty() {
        return Err(Error::AllChordsDegenerate);
    }
    let n = centers.len() as f64;
    let center = Point::new(
        centers.iter().map(|c| c.x).sum::<f64>() / n,
        centers.iter().map(|c| c.y).sum::<f64>() / n,
    );
    let r = pts.iter().map(|p| p.dist(&center)).sum::<f64>() / pts.len() as f64;
    Ok(PupilCircle {
        cx: center.x,
        cy: center.y,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn on_circle(cx: f64, cy: f64, r: f64, deg: f64) -> Point {
        let t = deg.to_radians();
        Point::new(cx + r * t.cos(), cy + r * t.sin())
    }

    #[test]
    fn cardinal_points_recover_center() {
        let p = |d| on_circle(100.0, 120.0, 30.0, d);
        // Chords 0°–180° and 90°–270°; pairing 0°–90° with 180°–270° gives
        // parallel chords whose bisectors coincide.
        let c = chord_center(p(0.0), p(180.0), p(90.0), p(270.0)).unwrap();
        assert!((c.x - 100.0).abs() < 1e-9 && (c.y - 120.0).abs() < 1e-9);
        assert!(matches!(
            chord_center(p(0.0), p(90.0), p(180.0), p(270.0)),
            Err(Error::ParallelBisectors)
        ));
    }

    #[test]
    fn horizontal_and_vertical_chords() {
        // Vertical bisector from a horizontal chord.
        let p = |d| on_circle(10.0, -4.0, 7.0, d);
        let c = chord_center(p(30.0), p(150.0), p(60.0), p(-60.0)).unwrap();
        assert!((c.x - 10.0).abs() < 1e-9 && (c.y + 4.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_points_are_parallel() {
        let p = |d| on_circle(0.0, 0.0, 5.0, d);
        let err = chord_center(p(0.0), p(180.0), p(0.0), p(180.0)).unwrap_err();
        assert!(matches!(err, Error::ParallelBisectors));
        let err = chord_center(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(5.0, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ParallelBisectors));
    }

    fn ring(cx: f64, cy: f64, r: f64, jitter: f64, rng: &mut ChaCha8Rng) -> EdgeMap {
        let mut pts = Vec::new();
        let steps = (2.0 * std::f64::consts::PI * r * 4.0) as usize;
        for k in 0..steps {
            let t = k as f64 / steps as f64 * std::f64::consts::TAU;
            let rr = r + if jitter > 0.0 { rng.random_range(-jitter..=jitter) } else { 0.0 };
            pts.push(((cx + rr * t.cos()).round() as usize, (cy + rr * t.sin()).round() as usize));
        }
        EdgeMap::from_points(128, 128, &pts)
    }

    #[test]
    fn rasterized_ring() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = estimate_pupil(&ring(64.0, 64.0, 20.0, 0.0, &mut rng)).unwrap();
        assert!((c.cx - 64.0).abs() <= 1.0 && (c.cy - 64.0).abs() <= 1.0, "{c:?}");
        assert!((c.r - 20.0).abs() <= 1.0);
    }

    #[test]
    fn jittered_rings() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cx = rng.random_range(50.0..78.0);
            let cy = rng.random_range(50.0..78.0);
            let c = estimate_pupil(&ring(cx, cy, 25.0, 1.0, &mut rng)).unwrap();
            assert!((c.cx - cx).abs() <= 2.0 && (c.cy - cy).abs() <= 2.0, "seed {seed}: {c:?}");
        }
    }

    #[test]
    fn four_pixels_is_too_few() {
        let map = EdgeMap::from_points(10, 10, &[(1, 1), (2, 2), (3, 3), (4, 4)]);
        assert!(matches!(
            estimate_pupil(&map),
            Err(Error::TooFewEdgePoints { found: 4, .. })
        ));
    }
}
