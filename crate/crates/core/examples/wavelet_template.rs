//! From a prepared ROI to a packed 640-bit template, one step at a time.
//!
//!     cargo run --example wavelet_template

use irisrec::evaluation::{capture_spec, synth_eye, CaptureProfile};
use irisrec::features::{
    first_row_reduce, make_filters, quantize_2bit, select_features, swt2, Band, IrisTemplate, Selection, WaveletFamily,
};
use irisrec::pipeline::{extract, PipelineConfig};

fn main() -> irisrec::Result<()> {
    let (img, _) = synth_eye(&capture_spec(11, 0, &CaptureProfile::clean()))?;
    let ex = extract(&img, &PipelineConfig::default())?;
    let input = &ex.roi.compressed;
    println!("wavelet input {}x{}", input.rows(), input.cols());

    for family in WaveletFamily::ALL {
        let f = make_filters(family);
        println!("  {:<24} {} taps", family.name(), f.lo.len());
    }

    let dec = swt2(input, &make_filters(WaveletFamily::Symlet4), 2)?;
    for (j, level) in dec.iter().enumerate() {
        let energy = |b: Band| level.band(b).as_slice().iter().map(|v| v * v).sum::<f64>();
        println!(
            "level {}: energy ca {:.3e} ch {:.3e} cv {:.3e} cd {:.3e}",
            j + 1,
            energy(Band::Ca),
            energy(Band::Ch),
            energy(Band::Cv),
            energy(Band::Cd)
        );
    }

    let selection: Selection = "ca2cv2".parse()?;
    let features = first_row_reduce(&select_features(&dec, &selection)?);
    let code = quantize_2bit(&features, input.cols())?;
    let template = IrisTemplate::from_code(code)?;
    assert_eq!(template.code(), ex.code);

    let mut hist = [0usize; 4];
    for &l in template.levels() {
        hist[l as usize] += 1;
    }
    println!("{} levels, histogram {:?}", template.levels().len(), hist);
    let packed = template.pack();
    let hex: String = packed.iter().map(|b| format!("{b:02x}")).collect();
    println!("packed ({} bytes): {hex}", packed.len());
    assert_eq!(IrisTemplate::unpack(&packed)?.levels(), template.levels());
    Ok(())
}
