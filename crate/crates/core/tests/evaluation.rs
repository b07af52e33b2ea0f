mod common;

use irisrec::evaluation::{
    dis_criterion, distribution_from_codes, encode_cohort, rank1_from_codes, CohortSpec, Fusion, LabeledCode, PairKind,
    Protocol,
};
use irisrec::features::{Eye, FeatureCode};
use irisrec::matching::{semi_correlation_codes, MatchConfig};
use irisrec::pipeline::PipelineConfig;
use proptest::prelude::*;

fn class(rows: usize, feats: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, feats), rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dis_matches_scalar_oracle(a in class(6, 5), b in class(4, 5)) {
        let got = dis_criterion(&a, &b).unwrap();
        prop_assume!(got.excluded == 0);
        let want = common::dis_oracle(&a, &b);
        prop_assert!((got.dis - want).abs() <= 1e-9 * want.abs().max(1.0), "{} vs {}", got.dis, want);
    }

    #[test]
    fn dis_is_symmetric_and_zero_on_itself(a in class(5, 4), b in class(3, 4)) {
        let ab = dis_criterion(&a, &b).unwrap().dis;
        let ba = dis_criterion(&b, &a).unwrap().dis;
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
        prop_assert_eq!(dis_criterion(&a, &a).unwrap().dis, 0.0);
    }

    #[test]
    fn dis_vanishes_iff_means_coincide(a in class(4, 3), offset in -3.0f64..3.0) {
        let shifted: Vec<Vec<f64>> = a.iter().map(|v| v.iter().map(|x| x + offset).collect()).collect();
        let d = dis_criterion(&a, &shifted).unwrap().dis;
        if offset == 0.0 {
            prop_assert_eq!(d, 0.0);
        } else {
            prop_assert!(d > 0.0);
        }
    }
}

fn toy_samples(per_subject: &[usize]) -> Vec<LabeledCode> {
    let mut out = Vec::new();
    for (s, &n) in per_subject.iter().enumerate() {
        for k in 0..n {
            let levels = (0..320).map(|i| ((i * (s + 3) + k * (i % 7 == 0) as usize) % 4) as u8).collect();
            out.push(LabeledCode {
                id: format!("{s}/{k}"),
                subject: format!("s{s}"),
                eye: Some(Eye::Left),
                code: Some(FeatureCode::new(levels, 160).unwrap()),
            });
        }
    }
    out
}

#[test]
fn distribution_counts_are_combinatorial() {
    let sizes = [3, 1, 4, 2];
    let d = distribution_from_codes(&toy_samples(&sizes), 4).unwrap();
    let total: usize = sizes.iter().sum();
    let intra: usize = sizes.iter().map(|n| n * (n - 1) / 2).sum();
    assert_eq!(d.intra().count, intra);
    assert_eq!(d.inter().count, total * (total - 1) / 2 - intra);
    assert_eq!(d.bins.iter().map(|b| b.intra).sum::<usize>(), intra);
}

#[test]
fn rank1_is_deterministic() {
    let samples = toy_samples(&[4, 4, 4, 4]);
    let cfg = MatchConfig::default();
    let a = rank1_from_codes(&samples, 2, Protocol::All, Fusion::Min, &cfg).unwrap();
    let b = rank1_from_codes(&samples, 2, Protocol::All, Fusion::Min, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn cohort_intra_inter_gap() {
    let codes = encode_cohort(&CohortSpec::new(12, 5, 8), &PipelineConfig::default()).unwrap();
    let d = distribution_from_codes(&codes, 4).unwrap();
    let (intra, inter) = (d.intra(), d.inter());
    assert!(inter.mean - intra.mean >= 3.0 * intra.std, "{intra:?} {inter:?}");
    for p in &d.pairs {
        assert!(matches!(p.kind, PairKind::Intra | PairKind::Inter));
    }
}

#[test]
fn same_identity_captures_match_below_tau() {
    let codes = encode_cohort(&CohortSpec::new(6, 2, 13), &PipelineConfig::default()).unwrap();
    let tau = MatchConfig::default().verify_threshold;
    for pair in codes.chunks(2) {
        let (a, b) = (pair[0].code.as_ref().unwrap(), pair[1].code.as_ref().unwrap());
        assert_eq!(pair[0].subject, pair[1].subject);
        let d = semi_correlation_codes(a, b, 4).unwrap().d_min;
        assert!(d < tau, "{}: {d}", pair[0].subject);
    }
}
