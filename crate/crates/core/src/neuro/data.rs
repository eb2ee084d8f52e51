use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Diagnostic label; AD is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Cn,
    Ad,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Ad
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Label::Ad
        } else {
            Label::Cn
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Cn => "CN",
            Label::Ad => "AD",
        })
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ad" | "dementia" | "probablead" => Ok(Label::Ad),
            "cn" | "control" | "hc" => Ok(Label::Cn),
            other => Err(format!("unknown label '{other}'")),
        }
    }
}

/// Model-ready inputs for one recording: standardized acoustic vector,
/// speech embedding and transcript token rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub id: String,
    pub acoustic: Vec<T>,
    pub speech: Vec<T>,
    /// Transcript token rows; only the first `text_valid_len` carry content.
    pub text: Array2<T>,
    pub text_valid_len: usize,
    pub label: Label,
}
