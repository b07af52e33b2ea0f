//! Locate the pupil and limbic boundaries of an eye image.
//!
//! Without an argument a synthetic eye is generated, so the result can be
//! compared against its known geometry.
//!
//!     cargo run --example segment_eye [-- image.pgm]

use irisrec::evaluation::{annulus_overlap, capture_spec, synth_eye, CaptureProfile};
use irisrec::image::load_gray;
use irisrec::segmentation::{segment, SegmentationConfig};

fn main() -> irisrec::Result<()> {
    let (img, truth) = match std::env::args().nth(1) {
        Some(path) => (load_gray(&path)?, None),
        None => {
            let (img, g) = synth_eye(&capture_spec(7, 0, &CaptureProfile::adverse()))?;
            (img, Some(g))
        }
    };
    let seg = segment(&img, &SegmentationConfig::default())?;
    let g = seg.geometry;
    println!("image        {}x{}", img.width(), img.height());
    println!("pupil        centre ({:.2}, {:.2})  radius {:.2}", g.pupil.cx, g.pupil.cy, g.pupil.r);
    println!("limbic       radius {:.2}", g.limbic_r);
    println!("flags        {:?}", seg.flags);

    if let Some(t) = truth {
        println!("truth pupil  centre ({:.2}, {:.2})  radius {:.2}", t.pupil.cx, t.pupil.cy, t.pupil.r);
        println!("truth limbic radius {:.2}", t.limbic_r);
        let o = annulus_overlap(&g, &t);
        println!(
            "annulus      {:.2}% foreign, {:.2}% lost -> {}",
            100.0 * o.foreign_fraction(),
            100.0 * o.lost_fraction(),
            if o.is_correct() { "correct" } else { "incorrect" }
        );
    }
    Ok(())
}
