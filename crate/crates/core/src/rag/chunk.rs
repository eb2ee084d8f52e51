use std::path::Path;

use serde::{Deserialize, Serialize};

/// One indexed sentence with its paragraph provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub id: u64,
    pub doc_id: String,
    pub paragraph_idx: usize,
    pub sentence_idx: usize,
    pub text: String,
}

/// Lower-cased tokens that end with a period but do not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "al.", "e.g.", "i.e.", "vs.", "dr.", "mr.", "mrs.", "ms.", "fig.", "eq.", "approx.", "cf.", "no.", "etc.",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_start_matches(['(', '[', '"', '\'']).to_lowercase();
    ABBREVIATIONS.contains(&w.as_str())
}

fn split_paragraphs(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.trim().is_empty() {
                out.push(std::mem::take(&mut current));
            }
            current.clear();
        } else {
            if !current.is_empty() {
                current.push('\n');
            }
            current.push_str(line);
        }
    }
    if !current.trim().is_empty() {
        out.push(current);
    }
    out
}

/// Splits after `.`, `?` or `!` when followed by whitespace, unless the
/// word ending there is a known abbreviation.
fn split_sentences(paragraph: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = paragraph.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for (i, &(pos, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '?' | '!') {
            continue;
        }
        let Some(&(_, next)) = chars.get(i + 1) else {
            continue;
        };
        if !next.is_whitespace() {
            continue;
        }
        let end = pos + c.len_utf8();
        let word = paragraph[start..end].split_whitespace().last().unwrap_or("");
        if c == '.' && is_abbreviation(word) {
            continue;
        }
        out.push(paragraph[start..end].to_string());
        start = end;
    }
    out.push(paragraph[start..].to_string());
    out.into_iter()
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| !s.is_empty())
        .collect()
}

/// Paragraphs (blank-line separated), then sentences; ids run in document
/// order starting at 0.
pub fn chunk_corpus(documents: &[(String, String)]) -> Vec<Chunk> {
    let mut chunks = Vec::new();
    for (doc_id, text) in documents {
        for (p, paragraph) in split_paragraphs(text).iter().enumerate() {
            for (s, sentence) in split_sentences(paragraph).into_iter().enumerate() {
                chunks.push(Chunk {
                    id: chunks.len() as u64,
                    doc_id: doc_id.clone(),
                    paragraph_idx: p,
                    sentence_idx: s,
                    text: sentence,
                });
            }
        }
    }
    chunks
}

/// Reads every `*.txt` file in `dir` (sorted by name); the doc id is the
/// file stem.
pub fn load_corpus_dir(dir: impl AsRef<Path>) -> std::io::Result<Vec<(String, String)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let stem = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok((stem, std::fs::read_to_string(&p)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Vec<Chunk> {
        chunk_corpus(&[("d".to_string(), text.to_string())])
    }

    #[test]
    fn two_paragraphs_three_sentences() {
        let c = doc("A. B.\n\nC.");
        let texts: Vec<&str> = c.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, ["A.", "B.", "C."]);
        assert_eq!(c.iter().map(|c| c.paragraph_idx).collect::<Vec<_>>(), [0, 0, 1]);
        assert_eq!(c.iter().map(|c| c.id).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn empty_and_unterminated() {
        assert!(doc("").is_empty());
        assert!(doc(" \n\n \n").is_empty());
        assert_eq!(doc("no terminator here").len(), 1);
    }

    #[test]
    fn abbreviations_do_not_split() {
        let c = doc("Fraser et al. reported pauses, e.g. long ones. Dr. Smith agreed! Why?");
        let texts: Vec<&str> = c.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(
            texts,
            ["Fraser et al. reported pauses, e.g. long ones.", "Dr. Smith agreed!", "Why?"]
        );
    }

    #[test]
    fn decimals_stay_whole() {
        assert_eq!(doc("Accuracy was 0.93 overall. Done.").len(), 2);
    }
}
