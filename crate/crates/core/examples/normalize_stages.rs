//! Unwrap the iris into a 50×300 strip and walk the ROI preparation steps,
//! writing each raster as PGM.
//!
//!     cargo run --example normalize_stages [-- image.pgm [out_dir]]

use std::path::PathBuf;

use irisrec::evaluation::{capture_spec, synth_eye, CaptureProfile};
use irisrec::image::{load_gray, write_pgm};
use irisrec::normalization::{prepare_roi, unwrap, NormalizationConfig};
use irisrec::segmentation::{segment, SegmentationConfig};

fn main() -> irisrec::Result<()> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => load_gray(path)?,
        None => synth_eye(&capture_spec(3, 0, &CaptureProfile::clean()))?.0,
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("irisrec-stages"));
    std::fs::create_dir_all(&out)?;

    let seg = segment(&img, &SegmentationConfig::default())?;
    let strip = unwrap(&img, &seg.geometry)?;
    let stages = prepare_roi(&strip, &NormalizationConfig::default())?;

    for (name, m, stretch) in [
        ("strip", &strip, false),
        ("roi", &stages.roi, false),
        ("enhanced", &stages.enhanced, true),
        ("compressed", &stages.compressed, true),
    ] {
        let mut raster = m.to_image();
        if stretch {
            raster = raster.normalized_for_display();
        }
        let path = out.join(format!("{name}.pgm"));
        write_pgm(&path, &raster)?;
        println!("{:<10} {:>2}x{:<3} -> {}", name, m.rows(), m.cols(), path.display());
    }
    Ok(())
}
