//! Rank-1 identification for 1 to 5 enrollments, intra/inter distance
//! statistics and a both-eyes run on an in-memory synthetic cohort.
//!
//!     cargo run --release --example evaluate_cohort [-- subjects samples seed]

use irisrec::evaluation::{distribution_from_codes, encode_cohort, rank1_from_codes, CohortSpec, Fusion, Protocol};
use irisrec::matching::MatchConfig;
use irisrec::pipeline::PipelineConfig;

fn main() -> irisrec::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let subjects = args.first().copied().unwrap_or(20);
    let samples = args.get(1).copied().unwrap_or(8);
    let seed = args.get(2).copied().unwrap_or(1) as u64;
    let cfg = PipelineConfig::default();
    let matching = MatchConfig::default();

    let codes = encode_cohort(&CohortSpec::new(subjects, samples, seed), &cfg)?;
    let failures = codes.iter().filter(|c| c.code.is_none()).count();
    println!("{subjects} subjects x {samples} captures, {failures} encoding failures");

    println!("enroll  probes  accuracy");
    for n in 1..samples.min(6) {
        let r = rank1_from_codes(&codes, n, Protocol::All, Fusion::Min, &matching)?;
        println!("{n:>6}  {:>6}  {:>7.2}%", r.probes, r.accuracy_pct);
    }

    let d = distribution_from_codes(&codes, matching.max_shift)?;
    let (intra, inter) = (d.intra(), d.inter());
    println!("intra-class d: mean {:.3} std {:.3} ({} pairs)", intra.mean, intra.std, intra.count);
    println!("inter-class d: mean {:.3} std {:.3} ({} pairs)", inter.mean, inter.std, inter.count);
    println!("crossover threshold {:.3}", d.crossover());

    let mut both = CohortSpec::new(subjects.min(12), samples.min(6), seed);
    both.both_eyes = true;
    let codes = encode_cohort(&both, &cfg)?;
    for protocol in [Protocol::Left, Protocol::Right, Protocol::BothEyes] {
        let r = rank1_from_codes(&codes, 1, protocol, Fusion::Min, &matching)?;
        println!("{protocol:?}: error {:.2}%", r.error_pct());
    }
    Ok(())
}
