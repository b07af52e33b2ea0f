//! Enroll a small synthetic population, then identify and verify fresh
//! captures with the shift-tolerant distance and the K-nearest-neighbour
//! vote.
//!
//!     cargo run --release --example identify

use irisrec::evaluation::{capture_spec, synth_eye, CaptureProfile};
use irisrec::features::IrisTemplate;
use irisrec::matching::{identify, semi_correlation, verify, MatchConfig};
use irisrec::pipeline::{extract_template, PipelineConfig};

const SUBJECTS: u64 = 8;
const ENROLLED: u64 = 3;

fn capture(subject: u64, k: u64, cfg: &PipelineConfig) -> irisrec::Result<IrisTemplate> {
    let (img, _) = synth_eye(&capture_spec(100 + subject, k, &CaptureProfile::cohort()))?;
    Ok(extract_template(&img, cfg)?.with_label(format!("subject-{subject}"), None))
}

fn main() -> irisrec::Result<()> {
    let cfg = PipelineConfig::default();
    let matching = MatchConfig::default();

    let mut gallery = Vec::new();
    for s in 0..SUBJECTS {
        for k in 0..ENROLLED {
            gallery.push(capture(s, k, &cfg)?);
        }
    }
    println!("gallery: {} templates of {SUBJECTS} subjects", gallery.len());

    let mut correct = 0;
    for s in 0..SUBJECTS {
        let probe = capture(s, ENROLLED + 1, &cfg)?;
        let id = identify(&probe, &gallery, &matching)?;
        let truth = format!("subject-{s}");
        correct += usize::from(id.label == truth);
        println!(
            "probe {truth:<10} -> {:<10} d={:.3} shift={:+}",
            id.label, id.score.d_min, id.score.best_shift
        );
    }
    println!("rank-1: {correct}/{SUBJECTS}");

    let probe = capture(0, 9, &cfg)?;
    let own: Vec<IrisTemplate> = gallery[..ENROLLED as usize].to_vec();
    let other: Vec<IrisTemplate> = gallery[ENROLLED as usize..2 * ENROLLED as usize].to_vec();
    let tau = matching.verify_threshold;
    let genuine = verify(&probe, &own, tau, matching.max_shift)?;
    let impostor = verify(&probe, &other, tau, matching.max_shift)?;
    println!("verify genuine  d={:.3} accept={}", genuine.d_min, genuine.accept);
    println!("verify impostor d={:.3} accept={}", impostor.d_min, impostor.accept);

    println!("d_min against a genuine template as the shift range grows:");
    for max_shift in 0..=8 {
        let s = semi_correlation(&probe, &own[0], max_shift)?;
        println!("  max_shift {max_shift}: d={:.4} best={:+}", s.d_min, s.best_shift);
    }
    Ok(())
}
