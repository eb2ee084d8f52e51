mod support;

use neurox_core::dsp::{
    compute_mfcc, compute_voice_quality, detect_speech_pauses, estimate_pitch, extract_acoustic_features,
    AudioClip, VadConfig,
};
use proptest::prelude::*;
use support::dsp_oracle::{self, DEFAULT_FRAMING};
use support::signals::{self, SR};

fn clip(samples: Vec<f64>) -> AudioClip<f64> {
    AudioClip::new(samples, SR).unwrap()
}

#[test]
fn mfcc_matches_direct_summation_oracle() {
    let samples = signals::chirp_half_second(3);
    let got = compute_mfcc(&clip(samples.clone()), 13).unwrap();
    let want = dsp_oracle::mfcc(&samples, 13, &DEFAULT_FRAMING);
    assert_eq!(got.nrows(), want.len());
    assert_eq!(got.nrows(), 48);
    let mut worst: f64 = 0.0;
    for (t, row) in want.iter().enumerate() {
        for (c, &w) in row.iter().enumerate() {
            worst = worst.max((got[[t, c]] - w).abs());
        }
    }
    assert!(worst < 1e-6, "max abs difference {worst:e}");
}

#[test]
fn sine_pitch_within_two_hz() {
    for f in [150.0, 220.0, 440.0] {
        let track = estimate_pitch(&clip(signals::sine(f, 1.0, 0.5))).unwrap();
        let voiced = track.voiced_f0();
        assert!(voiced.len() > track.frames.len() * 9 / 10);
        let mean = voiced.iter().sum::<f64>() / voiced.len() as f64;
        assert!((mean - f).abs() <= 2.0, "{f} Hz estimated as {mean}");
        assert!(voiced.iter().all(|v| (v - f).abs() <= 2.0));
    }
}

#[test]
fn periodic_signals_have_low_jitter_and_shimmer() {
    for samples in [signals::sine(200.0, 1.0, 0.5), signals::harmonic(130.0, 1.0)] {
        let c = clip(samples);
        let vq = compute_voice_quality(&c, &estimate_pitch(&c).unwrap());
        assert!(vq.jitter_pct.unwrap() < 0.5, "jitter {:?}", vq.jitter_pct);
        assert!(vq.shimmer_pct.unwrap() < 0.5, "shimmer {:?}", vq.shimmer_pct);
    }
}

#[test]
fn hnr_of_six_db_fixture() {
    let c = clip(signals::noisy_sine(200.0, 1.0, 6.0, 17));
    let vq = compute_voice_quality(&c, &estimate_pitch(&c).unwrap());
    let hnr = vq.hnr_db.unwrap();
    assert!((hnr - 6.0).abs() <= 1.5, "hnr {hnr}");
}

#[test]
fn one_third_silence_speech_ratio() {
    let segs = detect_speech_pauses(&clip(signals::tone_gap_tone()), &VadConfig::default()).unwrap();
    assert!((segs.speech_ratio() - 2.0 / 3.0).abs() <= 0.05, "{}", segs.speech_ratio());
}

#[test]
fn feature_vector_is_complete_for_voiced_audio() {
    let f = extract_acoustic_features(&clip(signals::tone_gap_tone())).unwrap();
    assert_eq!(f.values.len(), 47);
    f.validate().unwrap();
    assert!(!f.mask.iter().any(|&m| m), "unexpected masked slot");
    assert_eq!(f.get("pause_count"), Some(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn features_finite_or_masked(seed in any::<u64>(), gain in 0.0f64..1.0, f0 in 90.0f64..300.0) {
        let mut s = signals::noisy_sine(f0, 0.6, 10.0, seed);
        s.iter_mut().for_each(|v| *v *= gain);
        let f = extract_acoustic_features(&clip(s)).unwrap();
        prop_assert_eq!(f.values.len(), 47);
        for (v, m) in f.values.iter().zip(&f.mask) {
            prop_assert!(v.is_finite());
            prop_assert!(!*m || *v == -9999.0);
        }
    }

    #[test]
    fn speech_and_pause_ratios_sum_to_one(seed in any::<u64>(), gap in 0.0f64..1.0) {
        let mut s = signals::noisy_sine(150.0, 0.5, 20.0, seed);
        s.extend(std::iter::repeat(0.0).take((gap * SR as f64) as usize));
        s.extend(signals::sine(150.0, 0.5, 0.4));
        let segs = detect_speech_pauses(&clip(s), &VadConfig::default()).unwrap();
        prop_assert!((segs.speech_ratio() + segs.pause_ratio() - 1.0).abs() < 1e-9);
    }
}
