//! Write a synthetic dataset to disk with `.circles` ground truth, then
//! score segmentation and strip-region separability on it.
//!
//!     cargo run --release --example synth_dataset [-- out_dir]

use std::path::PathBuf;

use irisrec::evaluation::{localization_eval, region_information_report, write_cohort, CohortSpec};
use irisrec::pipeline::PipelineConfig;

fn main() -> irisrec::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("irisrec-synth"));
    let mut cohort = CohortSpec::new(10, 5, 42);
    // Replace the upper iris with noise so region B carries no identity.
    cohort.profile.region_b_noise = true;
    let index = write_cohort(&out, &cohort)?;
    println!("{} images of {} subjects in {}", index.len(), index.subject_count(), out.display());
    if let Some(first) = index.entries.first() {
        println!("e.g. {}", first.path.display());
    }

    let cfg = PipelineConfig::default();
    let loc = localization_eval(&index, &cfg.segmentation)?;
    println!(
        "localization: {}/{} correct ({:.1}%), {:?} per image",
        loc.correct,
        loc.images,
        loc.accuracy_pct,
        loc.mean_time.unwrap_or_default()
    );

    let report = region_information_report(&index, &cfg)?;
    for row in &report.rows {
        println!(
            "region {:?}: Dis sum {:>10.2}  distinct {:>6.2}%  non-distinct {:>6.2}%",
            row.region, row.dis_sum, row.distinct_pct, row.non_distinct_pct
        );
    }
    Ok(())
}
