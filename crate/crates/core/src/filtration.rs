//! Removal of duplicate, near-duplicate, excluded and non-English strings.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ingest::{normalize, Concept, ConceptSource};

#[derive(Debug, thiserror::Error)]
pub enum FilterError {
    #[error("fuzzy threshold {0} outside [0, 1]")]
    FuzzyThreshold(f64),
    #[error("english letter ratio {0} outside [0, 1]")]
    LetterRatio(f64),
    #[error("`{0}` is in both the include and the exclude list")]
    ListConflict(String),
}

/// Decides whether a string is English beyond the letter-ratio check.
pub trait LanguageDetector: Send + Sync {
    fn is_english(&self, text: &str) -> bool;
}

/// Translates a string to English. Errors are reported as plain messages.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str) -> Result<String, String>;
}

#[derive(Clone)]
pub struct FilterConfig {
    pub fuzzy_threshold: f64,
    pub include_list: Vec<String>,
    pub exclude_list: Vec<String>,
    pub english_letter_ratio: f64,
    pub detector: Option<Arc<dyn LanguageDetector>>,
    pub translator: Option<Arc<dyn Translator>>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            fuzzy_threshold: 0.90,
            include_list: Vec::new(),
            exclude_list: Vec::new(),
            english_letter_ratio: 0.70,
            detector: None,
            translator: None,
        }
    }
}

impl fmt::Debug for FilterConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterConfig")
            .field("fuzzy_threshold", &self.fuzzy_threshold)
            .field("include_list", &self.include_list)
            .field("exclude_list", &self.exclude_list)
            .field("english_letter_ratio", &self.english_letter_ratio)
            .field("detector", &self.detector.is_some())
            .field("translator", &self.translator.is_some())
            .finish()
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        if !(0.0..=1.0).contains(&self.fuzzy_threshold) {
            return Err(FilterError::FuzzyThreshold(self.fuzzy_threshold));
        }
        if !(0.0..=1.0).contains(&self.english_letter_ratio) {
            return Err(FilterError::LetterRatio(self.english_letter_ratio));
        }
        let excluded: HashSet<String> = self.exclude_list.iter().map(|s| normalize(s)).collect();
        if let Some(dup) = self
            .include_list
            .iter()
            .find(|s| excluded.contains(&normalize(s)))
        {
            return Err(FilterError::ListConflict(dup.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RejectReason {
    NonEnglish,
    Excluded,
    FuzzyDuplicateOf(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::NonEnglish => f.write_str("non_english"),
            RejectReason::Excluded => f.write_str("excluded"),
            RejectReason::FuzzyDuplicateOf(s) => write!(f, "fuzzy_duplicate_of:{s}"),
        }
    }
}

impl From<RejectReason> for String {
    fn from(r: RejectReason) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for RejectReason {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        match s.as_str() {
            "non_english" => Ok(RejectReason::NonEnglish),
            "excluded" => Ok(RejectReason::Excluded),
            _ => s
                .strip_prefix("fuzzy_duplicate_of:")
                .map(|rest| RejectReason::FuzzyDuplicateOf(rest.to_string()))
                .ok_or_else(|| format!("unknown rejection reason `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub text: String,
    pub reason: RejectReason,
}

/// Output of a logged filter: survivors plus what was dropped and why.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Filtered {
    pub kept: Vec<String>,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RejectionLog {
    pub entries: Vec<Rejection>,
}

impl RejectionLog {
    pub fn extend(&mut self, rejected: impl IntoIterator<Item = Rejection>) {
        self.entries.extend(rejected);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// JSON Lines, one `{"text": .., "reason": ..}` object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for entry in &self.entries {
            serde_json::to_writer(&mut out, entry)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Case-insensitive set semantics; keeps the first spelling of each key.
pub fn dedup_exact<S: AsRef<str>>(items: &[S]) -> Vec<String> {
    let mut seen = HashSet::new();
    items
        .iter()
        .map(AsRef::as_ref)
        .filter(|s| seen.insert(s.to_lowercase()))
        .map(str::to_string)
        .collect()
}

/// Edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// `1 - lev(lower(a), lower(b)) / max(|a|, |b|)`, lengths in characters.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    similarity_chars(&a, &b)
}

fn similarity_chars(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_chars(a, b) as f64 / longest as f64
}

/// `similarity(a, b) >= threshold`, skipping the edit distance when the
/// length difference alone already rules it out.
fn similar_chars(a: &[char], b: &[char], threshold: f64) -> bool {
    let longest = a.len().max(b.len());
    if longest > 0 {
        let bound = 1.0 - a.len().abs_diff(b.len()) as f64 / longest as f64;
        if bound < threshold {
            return false;
        }
    }
    similarity_chars(a, b) >= threshold
}

pub fn fuzzy_dedup<S: AsRef<str>>(items: &[S], threshold: f64) -> Vec<String> {
    fuzzy_dedup_logged(items, threshold).kept
}

/// Left-to-right pass: an item is dropped when it is at least `threshold`
/// similar to any earlier item. Dropped items are attributed to the survivor
/// reached by following first-similar links back through the list.
pub fn fuzzy_dedup_logged<S: AsRef<str>>(items: &[S], threshold: f64) -> Filtered {
    let items: Vec<&str> = items.iter().map(AsRef::as_ref).collect();
    let lowered: Vec<Vec<char>> = items
        .iter()
        .map(|s| s.to_lowercase().chars().collect())
        .collect();
    // survivor[i] is the index of the kept item that `i` resolves to.
    let mut survivor: Vec<usize> = Vec::with_capacity(items.len());
    let mut out = Filtered::default();
    for (j, item) in items.iter().enumerate() {
        let first_similar = (0..j).find(|&k| similar_chars(&lowered[k], &lowered[j], threshold));
        match first_similar {
            None => {
                survivor.push(j);
                out.kept.push(item.to_string());
            }
            Some(k) => {
                let root = survivor[k];
                survivor.push(root);
                out.rejected.push(Rejection {
                    text: item.to_string(),
                    reason: RejectReason::FuzzyDuplicateOf(items[root].to_string()),
                });
            }
        }
    }
    out
}

/// Removes excluded concepts and appends missing included ones as user concepts.
pub fn apply_lists(items: &[Concept], cfg: &FilterConfig) -> Vec<Concept> {
    apply_lists_logged(items, cfg).0
}

pub fn apply_lists_logged(items: &[Concept], cfg: &FilterConfig) -> (Vec<Concept>, Vec<Rejection>) {
    let excluded: HashSet<String> = cfg.exclude_list.iter().map(|s| normalize(s)).collect();
    let mut rejected = Vec::new();
    let mut kept: Vec<Concept> = Vec::with_capacity(items.len());
    for c in items {
        if excluded.contains(&c.normalized_text) {
            rejected.push(Rejection {
                text: c.raw_text.clone(),
                reason: RejectReason::Excluded,
            });
        } else {
            kept.push(c.clone());
        }
    }
    let mut present: HashSet<String> = kept.iter().map(|c| c.normalized_text.clone()).collect();
    for term in &cfg.include_list {
        if let Some(c) = Concept::new(term.clone(), ConceptSource::User) {
            if !excluded.contains(&c.normalized_text) && present.insert(c.normalized_text.clone()) {
                kept.push(c);
            }
        }
    }
    (kept, rejected)
}

/// Share of ASCII letters among all letters is at least `min_ratio`.
/// Strings without letters pass.
pub fn english_heuristic(text: &str, min_ratio: f64) -> bool {
    let (letters, ascii) = text
        .chars()
        .filter(|c| c.is_alphabetic())
        .fold((0usize, 0usize), |(l, a), c| {
            (l + 1, a + usize::from(c.is_ascii_alphabetic()))
        });
    letters == 0 || ascii as f64 / letters as f64 >= min_ratio
}

pub fn filter_non_english<S: AsRef<str>>(items: &[S], cfg: &FilterConfig) -> Vec<String> {
    filter_non_english_logged(items, cfg).kept
}

pub fn filter_non_english_logged<S: AsRef<str>>(items: &[S], cfg: &FilterConfig) -> Filtered {
    let mut out = Filtered::default();
    for item in items.iter().map(AsRef::as_ref) {
        let english = english_heuristic(item, cfg.english_letter_ratio)
            && cfg.detector.as_ref().is_none_or(|d| d.is_english(item));
        if english {
            out.kept.push(item.to_string());
            continue;
        }
        let translated = cfg
            .translator
            .as_ref()
            .and_then(|t| match t.translate(item) {
                Ok(s) if !s.trim().is_empty() => Some(s),
                Ok(_) => None,
                Err(e) => {
                    log::warn!("translation failed for {item:?}: {e}");
                    None
                }
            });
        match translated {
            Some(s) => out.kept.push(s),
            None => out.rejected.push(Rejection {
                text: item.to_string(),
                reason: RejectReason::NonEnglish,
            }),
        }
    }
    out
}

/// Non-English filtering, then exact and fuzzy deduplication.
pub fn filter_texts<S: AsRef<str>>(items: &[S], cfg: &FilterConfig) -> Filtered {
    let mut english = filter_non_english_logged(items, cfg);
    let unique = dedup_exact(&english.kept);
    let mut fuzzy = fuzzy_dedup_logged(&unique, cfg.fuzzy_threshold);
    english.rejected.append(&mut fuzzy.rejected);
    Filtered {
        kept: fuzzy.kept,
        rejected: english.rejected,
    }
}

/// Concept-level filtration: exact and fuzzy deduplication on normalized
/// text, include/exclude lists, then removal of concepts whose node id is
/// empty or already taken.
pub fn filter_concepts(items: &[Concept], cfg: &FilterConfig) -> (Vec<Concept>, Vec<Rejection>) {
    let mut seen = HashSet::new();
    let unique: Vec<&Concept> = items
        .iter()
        .filter(|c| seen.insert(c.normalized_text.clone()))
        .collect();
    let texts: Vec<&str> = unique.iter().map(|c| c.normalized_text.as_str()).collect();
    let fuzzy = fuzzy_dedup_logged(&texts, cfg.fuzzy_threshold);
    let survivors: HashSet<&str> = fuzzy.kept.iter().map(String::as_str).collect();
    let deduped: Vec<Concept> = unique
        .into_iter()
        .filter(|c| survivors.contains(c.normalized_text.as_str()))
        .cloned()
        .collect();

    let (listed, mut rejected) = apply_lists_logged(&deduped, cfg);
    rejected.splice(0..0, fuzzy.rejected);

    let mut ids = HashSet::new();
    let kept = listed
        .into_iter()
        .filter(|c| match crate::graph::make_node_id(&c.normalized_text) {
            Ok(id) => {
                let fresh = ids.insert(id.clone());
                if !fresh {
                    log::warn!(
                        "dropping concept `{}`: node id `{id}` already used",
                        c.normalized_text
                    );
                }
                fresh
            }
            Err(e) => {
                log::warn!("dropping concept: {e}");
                false
            }
        })
        .collect();
    (kept, rejected)
}

const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "by", "caused", "due", "for", "from", "in", "is", "not",
    "of", "on", "or", "that", "the", "to", "which", "with", "without",
];

const FOREIGN_STOPWORDS: &[&str] = &[
    "au", "aux", "avec", "dans", "de", "del", "della", "der", "des", "di", "du", "ein", "eine",
    "el", "est", "et", "las", "les", "los", "mit", "para", "pour", "sans", "une", "und", "von",
    "y",
];

/// Stopword vote between English and common Romance/Germanic function words.
/// French elisions such as `d'urine` count as foreign.
#[derive(Debug, Clone, Copy, Default)]
pub struct StopwordDetector;

impl LanguageDetector for StopwordDetector {
    fn is_english(&self, text: &str) -> bool {
        let mut english = 0usize;
        let mut foreign = 0usize;
        for raw in text.split_whitespace() {
            let token = raw
                .trim_matches(|c: char| !c.is_alphanumeric() && c != '\'' && c != '’')
                .to_lowercase();
            if is_elision(&token) || FOREIGN_STOPWORDS.contains(&token.as_str()) {
                foreign += 1;
            } else if ENGLISH_STOPWORDS.contains(&token.as_str()) {
                english += 1;
            }
        }
        foreign <= english
    }
}

fn is_elision(token: &str) -> bool {
    let Some((head, tail)) = token.split_once(['\'', '’']) else {
        return false;
    };
    matches!(head, "c" | "d" | "j" | "l" | "m" | "n" | "qu" | "s" | "t")
        && tail.chars().next().is_some_and(char::is_alphabetic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn concept(s: &str) -> Concept {
        Concept::new(s, ConceptSource::User).unwrap()
    }

    /// Plain recursive edit distance, used as an oracle for small inputs.
    fn lev_oracle(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let sub = lev_oracle(ra, rb) + usize::from(x != y);
                sub.min(lev_oracle(ra, b) + 1).min(lev_oracle(a, rb) + 1)
            }
        }
    }

    #[test]
    fn dedup_exact_examples() {
        assert_eq!(dedup_exact(&["Fever", "fever", "FEVER"]), ["Fever"]);
        assert_eq!(dedup_exact(&["a", "b", "a"]), ["a", "b"]);
        assert!(dedup_exact::<&str>(&[]).is_empty());
    }

    #[test]
    fn levenshtein_matches_oracle() {
        let cases = [
            ("heart attack", "heart attach"),
            ("fever", "diabetes"),
            ("", "abc"),
            ("kitten", "sitting"),
            ("flaw", "lawn"),
            ("fièvre", "fievre"),
        ];
        for (a, b) in cases {
            let ca: Vec<char> = a.chars().collect();
            let cb: Vec<char> = b.chars().collect();
            assert_eq!(levenshtein(a, b), lev_oracle(&ca, &cb), "{a} / {b}");
        }
        assert_eq!(levenshtein("heart attack", "heart attach"), 1);
        // f→d, +i, +a, v→b, e, +t, e, r→s
        assert_eq!(levenshtein("fever", "diabetes"), 6);
    }

    #[test]
    fn fuzzy_examples() {
        assert_eq!(
            fuzzy_dedup(&["heart attack", "heart attach"], 0.90),
            ["heart attack"]
        );
        assert!((similarity("heart attack", "heart attach") - (1.0 - 1.0 / 12.0)).abs() < 1e-12);
        assert_eq!(
            fuzzy_dedup(&["fever", "diabetes"], 0.90),
            ["fever", "diabetes"]
        );
        assert!((similarity("fever", "diabetes") - 0.25).abs() < 1e-12);
        assert_eq!(
            fuzzy_dedup(&["heart attack", "heart attach", "fever", "fevers"], 1.0),
            ["heart attack", "heart attach", "fever", "fevers"]
        );
    }

    #[test]
    fn fuzzy_log_names_survivor_through_chain() {
        // b is near a, c is near b but not a: both resolve to a.
        let items = ["abcdefghij", "abcdefghXY", "abcdefghXZ"];
        assert!(similarity(items[0], items[1]) >= 0.8);
        assert!(similarity(items[1], items[2]) >= 0.8);
        assert!(similarity(items[0], items[2]) >= 0.8);
        let out = fuzzy_dedup_logged(&items, 0.8);
        assert_eq!(out.kept, ["abcdefghij"]);
        assert!(out
            .rejected
            .iter()
            .all(|r| r.reason == RejectReason::FuzzyDuplicateOf("abcdefghij".into())));

        let chain = ["aaaaaaaaaa", "aaaaaaaabb", "aaaaaaabbb"];
        // lev(0,1)=2, lev(1,2)=1, lev(0,2)=3
        let out = fuzzy_dedup_logged(&chain, 0.8);
        assert_eq!(out.kept, ["aaaaaaaaaa"]);
        assert_eq!(
            out.rejected[1].reason,
            RejectReason::FuzzyDuplicateOf("aaaaaaaaaa".into())
        );
        let strict = fuzzy_dedup(&chain, 0.9);
        assert_eq!(strict, ["aaaaaaaaaa", "aaaaaaaabb"]);
    }

    #[test]
    fn apply_lists_examples() {
        let exclude = FilterConfig {
            exclude_list: vec!["fever".into()],
            ..Default::default()
        };
        assert!(apply_lists(&[concept("fever")], &exclude).is_empty());

        let include = FilterConfig {
            include_list: vec!["diabetes".into()],
            ..Default::default()
        };
        let out = apply_lists(&[concept("fever")], &include);
        assert_eq!(out, [concept("fever"), concept("diabetes")]);

        assert_eq!(
            apply_lists(&[concept("fever")], &FilterConfig::default()),
            [concept("fever")]
        );
    }

    #[test]
    fn included_item_not_duplicated() {
        let cfg = FilterConfig {
            include_list: vec!["  FEVER ".into()],
            ..Default::default()
        };
        assert_eq!(apply_lists(&[concept("fever")], &cfg).len(), 1);
    }

    #[test]
    fn exclusion_is_logged() {
        let cfg = FilterConfig {
            exclude_list: vec!["Fever".into()],
            ..Default::default()
        };
        let (_, rejected) = apply_lists_logged(&[concept("fever")], &cfg);
        assert_eq!(
            rejected,
            [Rejection {
                text: "fever".into(),
                reason: RejectReason::Excluded
            }]
        );
    }

    #[test]
    fn config_validation() {
        assert!(FilterConfig::default().validate().is_ok());
        let bad = FilterConfig {
            fuzzy_threshold: 1.5,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(FilterError::FuzzyThreshold(_))
        ));
        let conflict = FilterConfig {
            include_list: vec!["Fever".into()],
            exclude_list: vec!["fever".into()],
            ..Default::default()
        };
        assert!(matches!(
            conflict.validate(),
            Err(FilterError::ListConflict(_))
        ));
    }

    #[test]
    fn non_english_examples() {
        let cfg = FilterConfig::default();
        assert_eq!(
            filter_non_english(&["excessive secretion of urine"], &cfg),
            ["excessive secretion of urine"]
        );
        // 22 of 24 letters are ASCII, so the ratio check alone keeps it.
        assert_eq!(
            filter_non_english(&["sécrétion excessive d'urine"], &cfg).len(),
            1
        );
        let out = filter_non_english_logged(&["多尿"], &cfg);
        assert!(out.kept.is_empty());
        assert_eq!(out.rejected[0].reason, RejectReason::NonEnglish);
        assert_eq!(filter_non_english(&["12.5 %"], &cfg), ["12.5 %"]);
    }

    #[test]
    fn stopword_detector_drops_french() {
        let cfg = FilterConfig {
            detector: Some(Arc::new(StopwordDetector)),
            ..Default::default()
        };
        assert!(filter_non_english(&["sécrétion excessive d'urine"], &cfg).is_empty());
        assert_eq!(filter_non_english(&["vitamin d deficiency"], &cfg).len(), 1);
        assert_eq!(
            filter_non_english(&["excessive secretion of urine"], &cfg).len(),
            1
        );
    }

    struct Dict;
    impl Translator for Dict {
        fn translate(&self, text: &str) -> Result<String, String> {
            match text {
                "多尿" => Ok("polyuria".into()),
                _ => Err("no entry".into()),
            }
        }
    }

    #[test]
    fn translator_rescues_or_drops() {
        let cfg = FilterConfig {
            translator: Some(Arc::new(Dict)),
            ..Default::default()
        };
        let out = filter_non_english_logged(&["多尿", "発熱", "fever"], &cfg);
        assert_eq!(out.kept, ["polyuria", "fever"]);
        assert_eq!(out.rejected.len(), 1);
        assert_eq!(out.rejected[0].text, "発熱");
    }

    #[test]
    fn rejection_log_jsonl() {
        let log = RejectionLog {
            entries: vec![
                Rejection {
                    text: "多尿".into(),
                    reason: RejectReason::NonEnglish,
                },
                Rejection {
                    text: "heart attach".into(),
                    reason: RejectReason::FuzzyDuplicateOf("heart attack".into()),
                },
            ],
        };
        let mut buf = Vec::new();
        log.write_jsonl(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"text\":\"多尿\",\"reason\":\"non_english\"}\n\
             {\"text\":\"heart attach\",\"reason\":\"fuzzy_duplicate_of:heart attack\"}\n"
        );
        let back: Rejection =
            serde_json::from_str(r#"{"text":"x","reason":"fuzzy_duplicate_of:y"}"#).unwrap();
        assert_eq!(back.reason, RejectReason::FuzzyDuplicateOf("y".into()));
    }

    #[test]
    fn concept_filtration() {
        let items = [
            concept("Fever"),
            concept("fever"),
            concept("heart attack"),
            concept("heart attach"),
            concept("type-2 diabetes mellitus"),
            concept("type 2 diabetes mellitus"),
            concept("多尿"),
            concept("insomnia"),
        ];
        let cfg = FilterConfig {
            exclude_list: vec!["insomnia".into()],
            include_list: vec!["polyuria".into()],
            ..Default::default()
        };
        let (kept, rejected) = filter_concepts(&items, &cfg);
        let texts: Vec<_> = kept.iter().map(|c| c.normalized_text.as_str()).collect();
        assert_eq!(
            texts,
            [
                "fever",
                "heart attack",
                "type-2 diabetes mellitus",
                "polyuria"
            ]
        );
        assert_eq!(rejected.len(), 3);
        assert_eq!(rejected.last().unwrap().reason, RejectReason::Excluded);
    }

    #[test]
    fn filter_texts_chains_stages() {
        let cfg = FilterConfig::default();
        let out = filter_texts(
            &[
                "Heart attack",
                "heart attack",
                "heart attach",
                "多尿",
                "fever",
            ],
            &cfg,
        );
        assert_eq!(out.kept, ["Heart attack", "fever"]);
        assert_eq!(out.rejected.len(), 2);
    }
}
