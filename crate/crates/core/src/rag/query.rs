use serde::{Deserialize, Serialize};

use crate::dsp::FEATURE_NAMES;
use crate::neuro::{Label, Prediction};
use crate::providers::TranscriptText;

/// Number of acoustic features verbalised in a query.
pub const TOP_FEATURES: usize = 8;
/// Maximum transcript excerpt length in characters.
pub const TRANSCRIPT_LIMIT: usize = 1200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureZ {
    pub name: String,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationQuery {
    pub predicted_class: Label,
    pub probability: f64,
    pub acoustic_summary: Vec<FeatureZ>,
    pub transcript_excerpt: String,
    pub speech_stats: String,
}

/// Two decimals; negative zero prints as `0.00`.
pub fn format_z(z: f64) -> String {
    let s = format!("{z:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// At most `limit` characters, cut back to the last whitespace when the
/// limit falls inside a word.
pub fn truncate_at_word(text: &str, limit: usize) -> String {
    let text = text.trim();
    if text.chars().count() <= limit {
        return text.to_string();
    }
    let cut = text.char_indices().nth(limit).map_or(text.len(), |(i, _)| i);
    let head = &text[..cut];
    let next_is_space = text[cut..].chars().next().is_some_and(char::is_whitespace);
    let kept = if next_is_space {
        head
    } else {
        head.rfind(char::is_whitespace).map_or(head, |i| &head[..i])
    };
    kept.trim_end().to_string()
}

/// One-line summary of a speech embedding.
pub fn speech_note(embedding: &[f64]) -> String {
    let n = embedding.len().max(1) as f64;
    let mean = embedding.iter().sum::<f64>() / n;
    let std = (embedding.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let norm = embedding.iter().map(|v| v * v).sum::<f64>().sqrt();
    format!(
        "{}-dim utterance embedding, mean {mean:.3}, std {std:.3}, L2 norm {norm:.2}",
        embedding.len()
    )
}

/// Picks the `TOP_FEATURES` largest-|z| features (ties keep schema order).
pub fn build_query(
    prediction: &Prediction,
    standardized: &[f64],
    transcript: &TranscriptText,
    speech_stats: impl Into<String>,
) -> ExplanationQuery {
    let mut order: Vec<usize> = (0..standardized.len().min(FEATURE_NAMES.len())).collect();
    order.sort_by(|&a, &b| {
        standardized[b]
            .abs()
            .partial_cmp(&standardized[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let acoustic_summary = order
        .into_iter()
        .take(TOP_FEATURES)
        .map(|i| FeatureZ {
            name: FEATURE_NAMES[i].to_string(),
            z: standardized[i],
        })
        .collect();
    ExplanationQuery {
        predicted_class: prediction.label,
        probability: prediction.probability,
        acoustic_summary,
        transcript_excerpt: truncate_at_word(&transcript.raw, TRANSCRIPT_LIMIT),
        speech_stats: speech_stats.into(),
    }
}

impl ExplanationQuery {
    /// Class, acoustic features, speech summary, transcript; one block per
    /// line group, always in that order.
    pub fn render(&self) -> String {
        let features: Vec<String> = self
            .acoustic_summary
            .iter()
            .map(|f| format!("{}={}", f.name, format_z(f.z)))
            .collect();
        format!(
            "predicted class: {} (p={:.2})\nacoustic features (z-scores): {}\nspeech: {}\ntranscript: {}",
            self.predicted_class,
            self.probability,
            features.join(", "),
            self.speech_stats,
            self.transcript_excerpt,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(p: f64) -> Prediction {
        Prediction::from_logit((p / (1.0 - p)).ln(), 0.5)
    }

    #[test]
    fn class_line() {
        let q = build_query(&pred(0.93), &[0.0; 47], &TranscriptText::new("hi"), "note");
        assert!(q.render().contains("predicted class: AD (p=0.93)"));
    }

    #[test]
    fn zero_features_keep_schema_order() {
        let q = build_query(&pred(0.2), &[-0.0; 47], &TranscriptText::new(""), "n");
        let names: Vec<&str> = q.acoustic_summary.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, FEATURE_NAMES[..8]);
        assert!(q.render().contains(&format!("{}=0.00", FEATURE_NAMES[0])));
        assert!(!q.render().contains("-0.00"));
    }

    #[test]
    fn largest_magnitudes_first() {
        let mut z = vec![0.1; 47];
        z[30] = -4.0;
        z[5] = 3.0;
        let q = build_query(&pred(0.4), &z, &TranscriptText::new(""), "n");
        assert_eq!(q.acoustic_summary[0].name, FEATURE_NAMES[30]);
        assert_eq!(q.acoustic_summary[1].name, FEATURE_NAMES[5]);
    }

    #[test]
    fn blocks_in_order() {
        let r = build_query(&pred(0.7), &[1.0; 47], &TranscriptText::new("words"), "sn").render();
        let at = |s: &str| r.find(s).unwrap();
        assert!(at("predicted class") < at("acoustic features") && at("acoustic features") < at("speech: sn"));
        assert!(at("speech: sn") < at("transcript: words"));
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_at_word("abc def ghi", 5), "abc");
        assert_eq!(truncate_at_word("abc def ghi", 7), "abc def");
        assert_eq!(truncate_at_word("abc", 5), "abc");
        assert_eq!(truncate_at_word("abcdefgh", 3), "abc");
    }
}
