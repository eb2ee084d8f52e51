//! Synthetic recordings, transcripts and corpus for offline runs.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use anyhow::Result;
use neurox_core::dsp::write_wav_file;
use neurox_core::neuro::Label;
use neurox_core::AudioClip;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::artifacts::write_atomic;
use crate::manifest::{DatasetManifest, ManifestEntry, Split};

pub const SAMPLE_RATE: u32 = 16_000;

pub const FIXTURE_CONFIG: &str = include_str!("../../../configs/fixture.toml");

pub const CORPUS: [(&str, &str); 4] = [
    ("acoustic_markers", include_str!("../../../corpus/acoustic_markers.txt")),
    ("clinical_context", include_str!("../../../corpus/clinical_context.txt")),
    ("linguistic_markers", include_str!("../../../corpus/linguistic_markers.txt")),
    ("multimodal_models", include_str!("../../../corpus/multimodal_models.txt")),
];

/// Speaking style of a synthetic clip.
#[derive(Debug, Clone, Copy)]
pub struct VoiceSpec {
    pub f0_hz: f64,
    /// Relative f0 excursion of the slow intonation contour.
    pub f0_range: f64,
    pub syllable_s: f64,
    pub pause_s: f64,
    pub seconds: f64,
}

impl VoiceSpec {
    pub fn for_label(label: Label) -> Self {
        match label {
            Label::Cn => Self {
                f0_hz: 190.0,
                f0_range: 0.15,
                syllable_s: 0.45,
                pause_s: 0.15,
                seconds: 3.0,
            },
            Label::Ad => Self {
                f0_hz: 140.0,
                f0_range: 0.04,
                syllable_s: 0.35,
                pause_s: 0.55,
                seconds: 3.0,
            },
        }
    }
}

/// Harmonic "syllables" with an intonation contour, separated by
/// low-level noise pauses.
pub fn synth_voice(spec: &VoiceSpec, seed: u64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = SAMPLE_RATE as f64;
    let n = (spec.seconds * sr) as usize;
    let mut samples = Vec::with_capacity(n);
    let mut phase = 0.0;
    let mut t_in_unit = 0.0;
    let mut voiced = true;
    let mut unit_len = spec.syllable_s;
    for i in 0..n {
        let t = i as f64 / sr;
        if t_in_unit >= unit_len {
            t_in_unit = 0.0;
            voiced = !voiced;
            let base = if voiced { spec.syllable_s } else { spec.pause_s };
            unit_len = base * rng.gen_range(0.8..1.2);
        }
        let noise = rng.gen_range(-1.0..1.0) * 2e-3;
        if voiced {
            let f0 = spec.f0_hz * (1.0 + spec.f0_range * (TAU * 0.7 * t).sin());
            phase += TAU * f0 / sr;
            let env = (std::f64::consts::PI * t_in_unit / unit_len).sin().powf(0.5);
            let voice: f64 = (1..=6).map(|h| (h as f64 * phase).sin() / h as f64).sum();
            samples.push(0.3 * env * voice + noise);
        } else {
            samples.push(noise);
        }
        t_in_unit += 1.0 / sr;
    }
    AudioClip::new(samples, SAMPLE_RATE).expect("non-empty clip")
}

struct FixtureClip {
    id: &'static str,
    label: Label,
    split: Split,
    transcript: &'static str,
}

const FIXTURE_CLIPS: [FixtureClip; 4] = [
    FixtureClip {
        id: "S001",
        label: Label::Cn,
        split: Split::Train,
        transcript: "The boy is standing on a stool reaching for the cookie jar while his sister asks for one. \
                     The mother is drying dishes and the sink is overflowing onto the floor.",
    },
    FixtureClip {
        id: "S002",
        label: Label::Ad,
        split: Split::Train,
        transcript: "Well there's a uh a boy and he's um getting the uh the thing up there. \
                     And the water is uh... the water. I don't know what she's doing.",
    },
    FixtureClip {
        id: "S003",
        label: Label::Cn,
        split: Split::Test,
        transcript: "A woman washes plates at the window while water spills from the sink. \
                     Two children are taking cookies and the stool is about to tip over.",
    },
    FixtureClip {
        id: "S004",
        label: Label::Ad,
        split: Split::Test,
        transcript: "Uh the kids are um... they're uh getting something. \
                     The lady is um she's there and uh the stuff is, the stuff is falling.",
    },
];

/// Writes a complete offline dataset under `dir`:
/// `audio/*.wav`, `fixtures/<id>/transcript.txt`, `corpus/*.txt`,
/// `manifest.csv` and `config.toml`. Returns the manifest path.
pub fn write_fixture_dataset(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir.join("audio"))?;
    let mut entries = Vec::new();
    for (i, clip) in FIXTURE_CLIPS.iter().enumerate() {
        let audio = synth_voice(&VoiceSpec::for_label(clip.label), 1000 + i as u64);
        let wav = dir.join("audio").join(format!("{}.wav", clip.id));
        write_wav_file(&audio, &wav)?;
        write_atomic(
            &dir.join("fixtures").join(clip.id).join("transcript.txt"),
            clip.transcript.as_bytes(),
        )?;
        entries.push(ManifestEntry {
            id: clip.id.into(),
            audio_path: PathBuf::from("audio").join(format!("{}.wav", clip.id)),
            label: Some(clip.label),
            split: clip.split,
        });
    }
    for (name, text) in CORPUS {
        write_atomic(&dir.join("corpus").join(format!("{name}.txt")), text.as_bytes())?;
    }
    let manifest = dir.join("manifest.csv");
    DatasetManifest::write_csv(&entries, &manifest)?;
    write_atomic(&dir.join("config.toml"), FIXTURE_CONFIG.as_bytes())?;
    Ok(manifest)
}
