mod common;

use irisrec::evaluation::{synth_eye, SynthEyeSpec};
use irisrec::features::{
    encode_features, first_row_reduce, make_filters, quantize_2bit, swt2, FeatureConfig, IrisTemplate, WaveletFamily,
    TEMPLATE_LEVELS,
};
use irisrec::matching::{abs_distance, semi_correlation};
use irisrec::normalization::Matrix;
use irisrec::pipeline::{code_from_geometry, PipelineConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-50.0..50.0))
}

fn check_against_oracle(rows: usize, cols: usize, seed: u64) {
    let (e, at) = common::swt_oracle_error(&random_matrix(rows, cols, seed));
    assert!(e < 1e-9, "{at}: {e}");
}

#[test]
fn swt_matches_dilated_convolution_oracle_small() {
    for seed in 0..4 {
        check_against_oracle(8, 16, seed);
    }
}

#[test]
fn swt_matches_dilated_convolution_oracle_roi_shape() {
    check_against_oracle(16, 160, 99);
}

#[test]
fn constant_gain_and_vanishing_details() {
    let m = Matrix::from_fn(16, 160, |_, _| 7.25);
    for family in WaveletFamily::ALL {
        let dec = swt2(&m, &make_filters(family), 2).unwrap();
        if family.is_orthogonal() {
            assert!(dec[1].ca.as_slice().iter().all(|v| (v - 4.0 * 7.25).abs() < 1e-9), "{family}");
        }
        for level in &dec {
            for band in [&level.ch, &level.cv, &level.cd] {
                assert!(band.as_slice().iter().all(|v| v.abs() <= 1e-9), "{family}");
            }
        }
    }
}

#[test]
fn duplicated_radial_rows_give_same_vector() {
    let base = random_matrix(16, 160, 5);
    let m = Matrix::from_fn(16, 160, |r, c| if r == 5 { base.get(0, c) } else { base.get(r, c) });
    let from_row0 = first_row_reduce(&[&m]);
    let from_row5 = first_row_reduce(&[&m.window(5, 11, 0, 160)]);
    assert_eq!(from_row0, from_row5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn half_of_each_segment_has_magnitude_bit(
        v in prop::collection::hash_set(-100_000i32..100_000, 320)
    ) {
        // Distinct magnitudes make the median rule split each half exactly.
        let v: Vec<f64> = v.into_iter().map(|x| x as f64 + 0.5).collect();
        let mags: std::collections::HashSet<u64> = v.iter().map(|x| x.abs().to_bits()).collect();
        prop_assume!(mags.len() == v.len());
        let code = quantize_2bit(&v, 160).unwrap();
        for half in code.levels.chunks(160) {
            prop_assert_eq!(half.iter().filter(|&&l| l & 1 == 1).count(), 80);
        }
        for (x, l) in v.iter().zip(&code.levels) {
            prop_assert_eq!(*l >= 2, *x >= 0.0);
        }
    }

    #[test]
    fn quantizer_is_scale_invariant(
        v in prop::collection::vec(-1e3f64..1e3, 320),
        scale in 1e-3f64..1e3,
    ) {
        let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
        prop_assert_eq!(quantize_2bit(&v, 160).unwrap(), quantize_2bit(&scaled, 160).unwrap());
    }

    #[test]
    fn pack_round_trip(levels in prop::collection::vec(0u8..4, TEMPLATE_LEVELS)) {
        let t = IrisTemplate::new(levels).unwrap();
        let packed = t.pack();
        prop_assert_eq!(packed.len() * 8, 640);
        prop_assert_eq!(IrisTemplate::unpack(&packed).unwrap(), t);
    }

    #[test]
    fn column_shift_is_matched_exactly(seed in any::<u64>(), s in 1isize..=4, neg in any::<bool>()) {
        let s = if neg { -s } else { s };
        let m = random_matrix(16, 160, seed);
        let cfg = FeatureConfig::default();
        let a = IrisTemplate::from_code(encode_features(&m, &cfg).unwrap()).unwrap();
        let b = IrisTemplate::from_code(encode_features(&m.roll_cols(s), &cfg).unwrap()).unwrap();
        let score = semi_correlation(&a, &b, 4).unwrap();
        prop_assert_eq!(score.d_min, 0.0);
        prop_assert_eq!(score.best_shift.abs(), s.abs());
    }
}

fn noiseless(identity: u64, rotation_deg: f64) -> SynthEyeSpec {
    SynthEyeSpec {
        identity_seed: identity,
        noise_sigma: 0.0,
        rotation_deg,
        ..SynthEyeSpec::default()
    }
}

fn template_of(spec: &SynthEyeSpec) -> IrisTemplate {
    let (img, g) = synth_eye(spec).unwrap();
    let (_, _, code) = code_from_geometry(&img, &g, &PipelineConfig::default()).unwrap();
    IrisTemplate::from_code(code).unwrap()
}

#[test]
fn rotated_eye_matches_at_two_columns() {
    for identity in 20..26 {
        let a = template_of(&noiseless(identity, 0.0));
        let b = template_of(&noiseless(identity, 2.4));
        assert_ne!(a, b);
        let score = semi_correlation(&a, &b, 4).unwrap();
        // Two strip columns enter and leave the ROI window, so the codes
        // differ near the ROI ends; impostor distances sit around 0.8.
        assert!(score.d_min < 0.06, "{identity}: {score:?}");
        assert_eq!(score.best_shift.abs(), 2, "{identity}: {score:?}");
    }
}

#[test]
fn different_identities_are_far_apart() {
    let mut same = 0.0;
    let mut diff = 0.0;
    for k in 0..50u64 {
        let spec = |identity, capture| SynthEyeSpec {
            identity_seed: identity,
            capture_seed: capture,
            ..SynthEyeSpec::default()
        };
        let a = template_of(&spec(2 * k, 0));
        let a2 = template_of(&spec(2 * k, 1));
        let b = template_of(&spec(2 * k + 1, 0));
        same += abs_distance(a.levels(), a2.levels()).unwrap();
        diff += abs_distance(a.levels(), b.levels()).unwrap();
    }
    assert!(diff >= 5.0 * same, "same {same} diff {diff}");
}
