use std::collections::HashSet;
use std::path::Path;

use super::{EntityExtractor, EntitySpan, IngestError};

/// Dictionary-based entity matcher.
///
/// Terms and documents are split into tokens (maximal runs of alphanumeric
/// characters, lowercased), so matches are always anchored on token
/// boundaries and ignore case, punctuation and spacing differences. At each
/// token position the longest dictionary entry wins and the scan resumes
/// after it.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashSet<Vec<String>>,
    max_tokens: usize,
}

struct Token {
    key: String,
    start: usize,
    end: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        match (ch.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                tokens.push(Token {
                    key: text[s..i].to_lowercase(),
                    start: s,
                    end: i,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            key: text[s..].to_lowercase(),
            start: s,
            end: text.len(),
        });
    }
    tokens
}

impl Gazetteer {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut gz = Gazetteer::default();
        for term in terms {
            gz.insert(term.as_ref());
        }
        gz
    }

    /// One term per line; blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Self {
        Gazetteer::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self, IngestError> {
        std::fs::read_to_string(path)
            .map(|t| Gazetteer::parse(&t))
            .map_err(|source| IngestError::Io {
                path: path.display().to_string(),
                source,
            })
    }

    pub fn insert(&mut self, term: &str) {
        let key: Vec<String> = tokenize(term).into_iter().map(|t| t.key).collect();
        if key.is_empty() {
            return;
        }
        self.max_tokens = self.max_tokens.max(key.len());
        self.entries.insert(key);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All non-overlapping matches, left to right.
    pub fn find(&self, text: &str) -> Vec<EntitySpan> {
        let tokens = tokenize(text);
        let keys: Vec<String> = tokens.iter().map(|t| t.key.clone()).collect();
        let mut spans = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let longest = (1..=self.max_tokens.min(keys.len() - i))
                .rev()
                .find(|&n| self.entries.contains(&keys[i..i + n]));
            match longest {
                Some(n) => {
                    let (start, end) = (tokens[i].start, tokens[i + n - 1].end);
                    spans.push(EntitySpan {
                        text: text[start..end].to_string(),
                        start,
                        end,
                    });
                    i += n;
                }
                None => i += 1,
            }
        }
        spans
    }
}

impl EntityExtractor for Gazetteer {
    fn extract(&self, text: &str) -> Result<Vec<EntitySpan>, IngestError> {
        Ok(self.find(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hits(gz: &Gazetteer, text: &str) -> Vec<String> {
        gz.find(text).into_iter().map(|s| s.text).collect()
    }

    #[test]
    fn longest_match_wins() {
        let gz = Gazetteer::new(["severe acute respiratory syndrome", "syndrome"]);
        assert_eq!(
            hits(
                &gz,
                "Patients with severe acute respiratory syndrome, and another syndrome."
            ),
            ["severe acute respiratory syndrome", "syndrome"]
        );
    }

    #[test]
    fn no_mid_word_matches() {
        let gz = Gazetteer::new(["urine", "uria"]);
        assert!(hits(&gz, "polyuria and urinary tract").is_empty());
    }

    #[test]
    fn case_and_spacing_insensitive() {
        let gz = Gazetteer::new(["heart attack"]);
        let spans = gz.find("A HEART\n  Attack!");
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].text, "HEART\n  Attack");
        assert_eq!((spans[0].start, spans[0].end), (2, 16));
    }

    #[test]
    fn parse_skips_comments_and_blanks() {
        let gz = Gazetteer::parse("# medical terms\npolyuria\n\n  urine  \n#diabetes\n");
        assert_eq!(gz.len(), 2);
        assert!(hits(&gz, "diabetes").is_empty());
    }

    #[test]
    fn unicode_terms_match() {
        let gz = Gazetteer::new(["fièvre"]);
        assert_eq!(hits(&gz, "une FIÈVRE forte"), ["FIÈVRE"]);
    }
}
