const PUNCTUATION: [char; 4] = ['.', ',', '?', '\''];

/// Transcript normalization: lowercase, drop anything outside
/// `[a-z0-9 .,?']`, map whitespace to single spaces, collapse repeated
/// punctuation marks and trim.
pub fn preprocess_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut last: Option<char> = None;
    for c in raw.chars().flat_map(char::to_lowercase) {
        let c = if c.is_whitespace() { ' ' } else { c };
        let keep = c == ' ' || c.is_ascii_lowercase() || c.is_ascii_digit() || PUNCTUATION.contains(&c);
        if !keep {
            continue;
        }
        let repeated = last == Some(c) && (c == ' ' || PUNCTUATION.contains(&c));
        if repeated || (c == ' ' && last.is_none()) {
            continue;
        }
        out.push(c);
        last = Some(c);
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TranscriptText {
    pub raw: String,
    pub normalized: String,
}

impl TranscriptText {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let normalized = preprocess_text(&raw);
        Self { raw, normalized }
    }

    /// Whitespace-delimited tokens of the normalized text.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.normalized.split(' ').filter(|t| !t.is_empty())
    }
}
