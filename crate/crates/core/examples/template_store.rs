//! Persist templates in an IRDB store and tune the pipeline through the
//! `key = value` configuration format.
//!
//!     cargo run --example template_store

use irisrec::app::{AppConfig, TemplateStore};
use irisrec::evaluation::{capture_spec, synth_eye, CaptureProfile};
use irisrec::features::Eye;
use irisrec::matching::identify;
use irisrec::pipeline::extract_template;

fn main() -> irisrec::Result<()> {
    let cfg = AppConfig::parse("# tighter shift search\nmatching.max_shift = 3\nfeatures.family = sym4\n")?;
    println!("effective configuration:\n{}", cfg.to_text());

    let pipeline = cfg.pipeline();
    let mut store = TemplateStore::new();
    for (subject, seed) in [("ada", 1u64), ("grace", 2), ("linus", 3)] {
        for eye in [Eye::Left, Eye::Right] {
            let identity = seed * 2 + eye.to_byte() as u64;
            for k in 0..2 {
                let (img, _) = synth_eye(&capture_spec(identity, k, &CaptureProfile::clean()))?;
                store.enroll(subject, eye, extract_template(&img, &pipeline)?)?;
            }
        }
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("gallery.irdb");
    store.save(&path)?;
    let bytes = std::fs::metadata(&path)?.len();
    let loaded = TemplateStore::load(&path)?;
    assert_eq!(loaded, store);
    println!("{} records, {bytes} bytes on disk, round trip exact", loaded.len());

    let (probe_img, _) = synth_eye(&capture_spec(2 * 2 + 1, 5, &CaptureProfile::clean()))?;
    let probe = extract_template(&probe_img, &pipeline)?;
    let id = identify(&probe, &loaded.templates(), &cfg.matching)?;
    println!("probe identified as {} (d={:.3})", id.label, id.score.d_min);
    Ok(())
}
