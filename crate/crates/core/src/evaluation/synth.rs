//! Synthetic eye images with exact ground truth.
//!
//! An identity fixes the nominal geometry and an iris texture defined in
//! normalised polar coordinates (radius fraction `u` across the annulus,
//! angle `θ`), so the texture survives dilation and unwrapping unchanged.
//! Each capture then adds rotation, dilation and centre jitter, an optional
//! upper-lid occluder, specular dots inside the pupil and sensor noise.
//!
//! Intensities are chosen for the weighted-mask highlight: the skin level is
//! solved so every image has the same mean, which places the mask just
//! above the pupil and well below everything else.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{circles_path, format_circles, DatasetIndex};
use crate::error::{Error, Result};
use crate::features::Eye;
use crate::image::{write_pgm, GrayImage};
use crate::segmentation::{IrisGeometry, PupilCircle};

const PUPIL_LEVEL: f64 = 14.0;
const IRIS_LEVEL: f64 = 100.0;
const SCLERA_LEVEL: f64 = 160.0;
const LID_LEVEL: f64 = 125.0;
const SPECULAR_LEVEL: f64 = 250.0;
/// Image mean the skin level is solved for.
const TARGET_MEAN: f64 = 104.0;
const TEXTURE_COMPONENTS: usize = 48;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthEyeSpec {
    pub width: usize,
    pub height: usize,
    /// Selects the iris texture.
    pub identity_seed: u64,
    /// Selects noise, speculars and any per-capture texture.
    pub capture_seed: u64,
    pub pupil: PupilCircle,
    pub limbic_r: f64,
    /// Angular frequency band of the texture, in cycles per revolution.
    pub texture_band: (f64, f64),
    /// Standard deviation of the texture, in grey levels.
    pub texture_contrast: f64,
    /// Texture rotation, degrees clockwise on screen.
    pub rotation_deg: f64,
    /// Fraction of the iris band above the pupil hidden by the upper lid.
    pub occlusion: f64,
    pub specular_count: usize,
    pub noise_sigma: f64,
    /// Replace the texture of the upper image half with per-capture noise.
    pub region_b_noise: bool,
}

impl Default for SynthEyeSpec {
    fn default() -> Self {
        Self {
            width: 320,
            height: 280,
            identity_seed: 0,
            capture_seed: 0,
            pupil: PupilCircle {
                cx: 160.0,
                cy: 140.0,
                r: 30.0,
            },
            limbic_r: 93.0,
            texture_band: (6.0, 80.0),
            texture_contrast: 11.0,
            rotation_deg: 0.0,
            occlusion: 0.0,
            specular_count: 0,
            noise_sigma: 2.0,
            region_b_noise: false,
        }
    }
}

impl SynthEyeSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidSynthSpec(reason.to_string()));
        let p = &self.pupil;
        if !(p.r > 0.0 && p.r < self.limbic_r) {
            return bad("pupil radius must be positive and below the limbic radius");
        }
        if !(0.0..1.0).contains(&self.occlusion) {
            return bad("occlusion must lie in [0, 1)");
        }
        if p.cx - self.limbic_r < 1.0
            || p.cy - self.limbic_r < 1.0
            || p.cx + self.limbic_r > self.width as f64 - 2.0
            || p.cy + self.limbic_r > self.height as f64 - 2.0
        {
            return bad("iris does not fit in the image");
        }
        let (lo, hi) = self.texture_band;
        if !(lo > 0.0 && hi >= lo) || self.texture_contrast < 0.0 || self.noise_sigma < 0.0 {
            return bad("texture band, contrast and noise must be positive");
        }
        Ok(())
    }

    pub fn geometry(&self) -> IrisGeometry {
        IrisGeometry {
            pupil: self.pupil,
            limbic_r: self.limbic_r,
        }
    }
}

/// One plane wave in `(u, θ)`.
#[derive(Debug, Clone, Copy)]
struct Component {
    amp: f64,
    m: usize,
    f: f64,
    phase: f64,
}

/// Radial samples of the per-component phase table.
const U_TABLE: usize = 1024;

struct Texture {
    /// Sorted by angular frequency.
    comps: Vec<Component>,
    /// `(cos, sin)` of `2πf·u + phase` per table row, per component.
    radial: Vec<(f64, f64)>,
}

impl Texture {
    fn new(seed: u64, band: (f64, f64), contrast: f64) -> Texture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7e87);
        let mut comps: Vec<Component> = (0..TEXTURE_COMPONENTS)
            .map(|_| Component {
                amp: rng.random_range(0.5..1.0),
                // Integer angular frequencies keep the texture continuous at 0/360°.
                m: rng.random_range(band.0..=band.1).round() as usize,
                f: rng.random_range(-1.5..1.5),
                phase: rng.random_range(0.0..TAU),
            })
            .collect();
        let energy: f64 = comps.iter().map(|c| c.amp * c.amp / 2.0).sum();
        let scale = contrast / energy.sqrt();
        comps.iter_mut().for_each(|c| c.amp *= scale);
        comps.sort_by_key(|c| c.m);
        let mut radial = Vec::with_capacity(U_TABLE * comps.len());
        for k in 0..U_TABLE {
            let u = k as f64 / (U_TABLE - 1) as f64;
            for c in &comps {
                let b = TAU * c.f * u + c.phase;
                radial.push((b.cos(), b.sin()));
            }
        }
        Texture { comps, radial }
    }

    /// `Σ amp·cos(m·θ + 2πf·u + phase)`, with `cos/sin(mθ)` stepped up by
    /// complex multiplication and the radial term read from the table.
    fn at(&self, u: f64, theta: f64) -> f64 {
        let row = (u.clamp(0.0, 1.0) * (U_TABLE - 1) as f64).round() as usize;
        let radial = &self.radial[row * self.comps.len()..(row + 1) * self.comps.len()];
        let (s1, c1) = theta.sin_cos();
        let (mut cm, mut sm) = (1.0, 0.0);
        let mut m = 0;
        let mut sum = 0.0;
        for (c, &(cb, sb)) in self.comps.iter().zip(radial) {
            while m < c.m {
                (cm, sm) = (cm * c1 - sm * s1, sm * c1 + cm * s1);
                m += 1;
            }
            sum += c.amp * (cm * cb - sm * sb);
        }
        sum
    }
}

/// Texture weight across the annulus: full over the inner band used for
/// features, fading out before the limbus so the outer iris stays smooth.
fn taper(u: f64) -> f64 {
    if u <= 0.62 {
        1.0
    } else if u >= 0.8 {
        0.0
    } else {
        0.5 * (1.0 + (PI * (u - 0.62) / 0.18).cos())
    }
}

/// Coverage of a pixel by the disc `d < r`, with a one-pixel ramp.
fn inside(d: f64, r: f64) -> f64 {
    (r - d + 0.5).clamp(0.0, 1.0)
}

fn capture_rng(spec: &SynthEyeSpec, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        spec.identity_seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(spec.capture_seed.wrapping_mul(0xbf58_476d_1ce4_e5b9))
            ^ salt,
    )
}

/// Renders an eye and returns it with its exact geometry. Identical specs
/// give bit-identical images.
pub fn synth_eye(spec: &SynthEyeSpec) -> Result<(GrayImage, IrisGeometry)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let p = spec.pupil;
    let rl = spec.limbic_r;
    let texture = Texture::new(spec.identity_seed, spec.texture_band, spec.texture_contrast);
    let noise_texture = spec
        .region_b_noise
        .then(|| Texture::new(spec.capture_seed.wrapping_add(spec.identity_seed << 20) ^ 0xb0b, spec.texture_band, spec.texture_contrast));
    let rot = spec.rotation_deg.to_radians();

    // Eye opening: ellipse around the iris; the lid line sits a fraction of
    // the upper iris band below the top of the iris and sags at the sides.
    let (ax, ay) = (1.9 * rl, 0.8 * rl);
    let lid_top = p.cy - rl + spec.occlusion * (rl - p.r);
    let lid_y = |x: f64| lid_top + 0.25 * rl * ((x - p.cx) / ax).powi(2);

    // Everything except the skin, whose coverage is kept for the level solve.
    let mut data = vec![0.0; w * h];
    let mut skin = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (xf, yf) = (x as f64, y as f64);
            let (dx, dy) = (xf - p.cx, yf - p.cy);
            let d = dx.hypot(dy);
            let e = ((dx / ax).powi(2) + (dy / ay).powi(2)).sqrt();
            // Skin coverage of the opening boundary (one-pixel ramp in e·ay).
            let open = ((1.0 - e) * ay + 0.5).clamp(0.0, 1.0);
            let iris_cov = inside(d, rl);
            let pupil_cov = inside(d, p.r);

            let mut v = SCLERA_LEVEL;
            let u = ((d - p.r) / (rl - p.r)).clamp(0.0, 1.0);
            if iris_cov > 0.0 {
                let weight = taper(u);
                let tex = if weight > 0.0 {
                    let theta = dy.atan2(dx) - rot;
                    match &noise_texture {
                        Some(nt) if dy < 0.0 => nt.at(u, theta),
                        _ => texture.at(u, theta),
                    }
                } else {
                    0.0
                };
                let iris = IRIS_LEVEL + weight * tex;
                v = iris_cov * iris + (1.0 - iris_cov) * v;
            }
            v = pupil_cov * PUPIL_LEVEL + (1.0 - pupil_cov) * v;

            // Upper lid hides everything above its line (the pupil never, by
            // construction of the occlusion fraction).
            let lid = (lid_y(xf) - yf + 0.5).clamp(0.0, 1.0) * (1.0 - pupil_cov);
            if spec.occlusion > 0.0 {
                v = lid * LID_LEVEL + (1.0 - lid) * v;
            }
            data[y * w + x] = v * open;
            skin[y * w + x] = 1.0 - open;
        }
    }

    // Speculars: small bright discs well inside the pupil.
    let mut rng = capture_rng(spec, 0x51ec);
    for _ in 0..spec.specular_count {
        let rr = rng.random_range(0.0..0.5) * p.r;
        let t = rng.random_range(0.0..TAU);
        let (sx, sy) = (p.cx + rr * t.cos(), p.cy + rr * t.sin());
        let sr = rng.random_range(1.5..3.0);
        let (x0, x1) = ((sx - sr - 1.0).floor() as usize, (sx + sr + 1.0).ceil() as usize);
        let (y0, y1) = ((sy - sr - 1.0).floor() as usize, (sy + sr + 1.0).ceil() as usize);
        for y in y0..=y1.min(h - 1) {
            for x in x0..=x1.min(w - 1) {
                let c = inside((x as f64 - sx).hypot(y as f64 - sy), sr);
                let i = y * w + x;
                data[i] = c * SPECULAR_LEVEL + (1.0 - c) * data[i];
            }
        }
    }

    // Solve the skin level for the target mean.
    let n = (w * h) as f64;
    let base: f64 = data.iter().sum();
    let skin_area: f64 = skin.iter().sum();
    let skin_level = if skin_area > 0.0 {
        ((TARGET_MEAN * n - base) / skin_area).clamp(60.0, 230.0)
    } else {
        0.0
    };
    let normal = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let mut noise_rng = capture_rng(spec, 0x0015e);
    for (v, s) in data.iter_mut().zip(&skin) {
        *v += s * skin_level;
        if spec.noise_sigma > 0.0 {
            *v += normal.sample(&mut noise_rng);
        }
        *v = v.clamp(0.0, 255.0);
    }
    Ok((GrayImage::new(w, h, data)?, spec.geometry()))
}

/// Nominal pupil radius and limbic/pupil ratio ranges of generated
/// identities.
const RADIUS_BANDS: [((f64, f64), (f64, f64)); 3] = [
    ((26.0, 31.5), (3.0, 3.3)),
    ((37.5, 40.0), (2.55, 2.9)),
    ((44.5, 46.0), (2.35, 2.6)),
];

/// Per-capture variability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureProfile {
    pub noise_sigma: f64,
    /// Standard deviation of the texture rotation, degrees.
    pub rotation_sigma_deg: f64,
    /// Maximum centre displacement, pixels.
    pub center_jitter: f64,
    /// Maximum relative change of the pupil radius.
    pub dilation_jitter: f64,
    /// Occlusion drawn uniformly from this range.
    pub occlusion: (f64, f64),
    pub specular_count: usize,
    pub region_b_noise: bool,
}

impl CaptureProfile {
    /// Low noise, no occluder, no speculars.
    pub fn clean() -> Self {
        Self {
            noise_sigma: 2.0,
            rotation_sigma_deg: 0.0,
            center_jitter: 6.0,
            dilation_jitter: 0.0,
            occlusion: (0.0, 0.0),
            specular_count: 0,
            region_b_noise: false,
        }
    }

    /// 30% upper occlusion, three specular dots, stronger noise.
    pub fn adverse() -> Self {
        Self {
            noise_sigma: 6.0,
            occlusion: (0.3, 0.3),
            specular_count: 3,
            ..Self::clean()
        }
    }

    /// Enrollment/probe captures for identification experiments.
    pub fn cohort() -> Self {
        Self {
            noise_sigma: 4.0,
            rotation_sigma_deg: 2.0,
            center_jitter: 4.0,
            dilation_jitter: 0.04,
            occlusion: (0.0, 0.2),
            specular_count: 2,
            region_b_noise: false,
        }
    }
}

impl Default for CaptureProfile {
    fn default() -> Self {
        Self::cohort()
    }
}

/// Nominal geometry of an identity, centred in a 320×280 frame.
pub fn identity_geometry(identity_seed: u64) -> IrisGeometry {
    let mut rng = ChaCha8Rng::seed_from_u64(identity_seed ^ 0x6e0_6e0);
    let ((r_lo, r_hi), (q_lo, q_hi)) = RADIUS_BANDS[rng.random_range(0..RADIUS_BANDS.len())];
    let r = rng.random_range(r_lo..=r_hi);
    let ratio = rng.random_range(q_lo..=q_hi);
    IrisGeometry {
        pupil: PupilCircle { cx: 160.0, cy: 140.0, r },
        limbic_r: r * ratio,
    }
}

/// Spec for capture `capture` of identity `identity_seed`.
pub fn capture_spec(identity_seed: u64, capture: u64, profile: &CaptureProfile) -> SynthEyeSpec {
    let nominal = identity_geometry(identity_seed);
    let mut spec = SynthEyeSpec {
        identity_seed,
        capture_seed: capture,
        noise_sigma: profile.noise_sigma,
        specular_count: profile.specular_count,
        region_b_noise: profile.region_b_noise,
        ..SynthEyeSpec::default()
    };
    let mut rng = capture_rng(&spec, 0xca97);
    let dil = 1.0 + rng.random_range(-1.0..=1.0) * profile.dilation_jitter;
    let r = nominal.pupil.r * dil;
    let ratio = nominal.limbic_r / nominal.pupil.r / dil.sqrt();
    let limbic_r = r * ratio;
    // Keep the iris inside the frame whatever the jitter.
    let slack_x = (spec.width as f64 / 2.0 - limbic_r - 3.0).max(0.0).min(profile.center_jitter);
    let slack_y = (spec.height as f64 / 2.0 - limbic_r - 3.0).max(0.0).min(profile.center_jitter);
    let jx = if slack_x > 0.0 { rng.random_range(-slack_x..=slack_x) } else { 0.0 };
    let jy = if slack_y > 0.0 { rng.random_range(-slack_y..=slack_y) } else { 0.0 };
    spec.pupil = PupilCircle {
        cx: nominal.pupil.cx + jx,
        cy: nominal.pupil.cy + jy,
        r,
    };
    spec.limbic_r = limbic_r;
    if profile.rotation_sigma_deg > 0.0 {
        let normal = Normal::new(0.0, profile.rotation_sigma_deg).expect("valid sigma");
        spec.rotation_deg = normal.sample(&mut rng);
    }
    let (o_lo, o_hi) = profile.occlusion;
    spec.occlusion = if o_hi > o_lo { rng.random_range(o_lo..o_hi) } else { o_lo };
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = capture_spec(7, 3, &CaptureProfile::cohort());
        let (a, ga) = synth_eye(&spec).unwrap();
        let (b, gb) = synth_eye(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ga, gb);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = SynthEyeSpec::default();
        spec.limbic_r = 20.0;
        assert!(matches!(synth_eye(&spec), Err(Error::InvalidSynthSpec(_))));
        let mut spec = SynthEyeSpec::default();
        spec.occlusion = 1.0;
        assert!(synth_eye(&spec).is_err());
        let mut spec = SynthEyeSpec::default();
        spec.limbic_r = 150.0;
        assert!(synth_eye(&spec).is_err());
    }

    #[test]
    fn mean_is_on_target() {
        for id in 0..5 {
            let (img, _) = synth_eye(&capture_spec(id, 0, &CaptureProfile::adverse())).unwrap();
            assert!((img.mean() - TARGET_MEAN).abs() < 1.5, "{}", img.mean());
        }
    }

    #[test]
    fn geometry_bands() {
        for id in 0..200 {
            let g = identity_geometry(id);
            assert!(g.is_valid());
            assert!(g.limbic_r < 120.0);
        }
    }
}

/// A generated population: `subjects × samples` captures per eye.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub subjects: usize,
    pub samples: usize,
    pub seed: u64,
    /// Generate a left and a right eye (distinct textures) per subject.
    pub both_eyes: bool,
    pub profile: CaptureProfile,
}

impl CohortSpec {
    pub fn new(subjects: usize, samples: usize, seed: u64) -> Self {
        Self {
            subjects,
            samples,
            seed,
            both_eyes: false,
            profile: CaptureProfile::cohort(),
        }
    }

    fn eyes(&self) -> Vec<Option<Eye>> {
        if self.both_eyes {
            vec![Some(Eye::Left), Some(Eye::Right)]
        } else {
            vec![None]
        }
    }

    /// Texture identity of one eye of one subject.
    pub fn identity_seed(&self, subject: usize, eye: Option<Eye>) -> u64 {
        let e = match eye {
            Some(Eye::Right) => 1,
            _ => 0,
        };
        self.seed.wrapping_mul(1_000_003).wrapping_add(2 * subject as u64 + e)
    }

    pub fn subject_name(subject: usize) -> String {
        format!("s{subject:03}")
    }

    /// Every capture's spec with its subject, eye and sample number, in
    /// dataset order (subject, sample, eye).
    pub fn specs(&self) -> Vec<(String, Option<Eye>, usize, SynthEyeSpec)> {
        let mut out = Vec::new();
        for s in 0..self.subjects {
            for k in 0..self.samples {
                for eye in self.eyes() {
                    let spec = capture_spec(self.identity_seed(s, eye), k as u64, &self.profile);
                    out.push((Self::subject_name(s), eye, k, spec));
                }
            }
        }
        out
    }
}

/// Renders a cohort in memory.
pub fn cohort_images(cohort: &CohortSpec) -> Result<Vec<(String, Option<Eye>, GrayImage, IrisGeometry)>> {
    cohort
        .specs()
        .into_par_iter()
        .map(|(subject, eye, _, spec)| synth_eye(&spec).map(|(img, g)| (subject, eye, img, g)))
        .collect()
}

/// Writes a cohort as `dir/<subject>/<subject>[_L|_R]_<k>.pgm` with
/// `.circles` ground-truth sidecars, and returns its index.
pub fn write_cohort(dir: &Path, cohort: &CohortSpec) -> Result<DatasetIndex> {
    cohort.specs().into_par_iter().try_for_each(|(subject, eye, k, spec)| -> Result<()> {
        let (img, g) = synth_eye(&spec)?;
        let sub = dir.join(&subject);
        std::fs::create_dir_all(&sub)?;
        let tag = match eye {
            Some(Eye::Left) => "_L",
            Some(Eye::Right) => "_R",
            None => "",
        };
        let path = sub.join(format!("{subject}{tag}_{k:02}.pgm"));
        write_pgm(&path, &img)?;
        std::fs::write(circles_path(&path), format_circles(&g))?;
        Ok(())
    })?;
    DatasetIndex::load(dir)
}
