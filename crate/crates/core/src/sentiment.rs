//! Lexicon-based polarity classification.
//!
//! A document is Positive when it contains more positive than negative
//! lexicon hits, Negative in the opposite case, and Neutral on a tie
//! (including no hits at all). Negation is not modeled.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{parse_sections, LexiconError, Pattern, PatternSet};

const DEMO_LEXICON: &str = include_str!("../resources/sentiment_demo.lex");

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
    Neutral,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
            Label::Neutral => "neutral",
        }
    }

    /// Strict-majority rule over hit counts.
    pub fn from_counts(pos: usize, neg: usize) -> Self {
        match pos.cmp(&neg) {
            std::cmp::Ordering::Greater => Label::Positive,
            std::cmp::Ordering::Less => Label::Negative,
            std::cmp::Ordering::Equal => Label::Neutral,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentResult {
    pub pos_count: usize,
    pub neg_count: usize,
    pub label: Label,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentimentLexicon {
    positive: PatternSet,
    negative: PatternSet,
}

impl SentimentLexicon {
    /// Builds a lexicon, rejecting any entry listed under both polarities.
    pub fn new(
        positive: impl IntoIterator<Item = Pattern>,
        negative: impl IntoIterator<Item = Pattern>,
    ) -> Result<Self, LexiconError> {
        let positive: PatternSet = positive.into_iter().collect();
        let negative: PatternSet = negative.into_iter().collect();
        if let Some(shared) = positive.patterns().into_iter().find(|p| negative.contains(p)) {
            return Err(LexiconError::Conflict {
                entry: shared.to_string(),
            });
        }
        if positive.is_empty() {
            log::warn!("sentiment lexicon has no positive entries");
        }
        if negative.is_empty() {
            log::warn!("sentiment lexicon has no negative entries");
        }
        Ok(Self { positive, negative })
    }

    /// Parses the `[positive]` / `[negative]` section format. Missing or
    /// empty sections are allowed (and warned about).
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let sections = parse_sections(text, &["positive", "negative"])?;
        let pos = sections.get("positive").unwrap_or_default().to_vec();
        let neg = sections.get("negative").unwrap_or_default().to_vec();
        Self::new(pos, neg)
    }

    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| SentimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let lex = Self::parse(&text)?;
        log::info!(
            "loaded sentiment lexicon {}: {} positive, {} negative entries",
            path.display(),
            lex.positive_len(),
            lex.negative_len()
        );
        Ok(lex)
    }

    /// The small bundled demonstration lexicon.
    pub fn demo() -> Self {
        Self::parse(DEMO_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn positive_len(&self) -> usize {
        self.positive.len()
    }

    pub fn negative_len(&self) -> usize {
        self.negative.len()
    }

    pub fn positive(&self) -> &PatternSet {
        &self.positive
    }

    pub fn negative(&self) -> &PatternSet {
        &self.negative
    }

    /// Same entries with the polarities exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }

    /// Counts token occurrences hitting each polarity. A token counts at
    /// most once per polarity.
    pub fn count_matches<S: AsRef<str>>(&self, tokens: &[S]) -> (usize, usize) {
        tokens.iter().fold((0, 0), |(pos, neg), t| {
            let t = t.as_ref();
            (
                pos + usize::from(self.positive.matches(t)),
                neg + usize::from(self.negative.matches(t)),
            )
        })
    }

    pub fn classify<S: AsRef<str>>(&self, tokens: &[S]) -> SentimentResult {
        let (pos_count, neg_count) = self.count_matches(tokens);
        SentimentResult {
            pos_count,
            neg_count,
            label: Label::from_counts(pos_count, neg_count),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(text: &str) -> SentimentLexicon {
        SentimentLexicon::parse(text).unwrap()
    }

    #[test]
    fn parse_counts_entries() {
        let l = lex("[positive]\ngood\nhappi*\n[negative]\nbad\n");
        assert_eq!((l.positive_len(), l.negative_len()), (2, 1));
    }

    #[test]
    fn conflicting_entry_rejected() {
        let err = SentimentLexicon::parse("[positive]\ngood\n[negative]\ngood\n").unwrap_err();
        assert_eq!(err, LexiconError::Conflict { entry: "good".into() });
    }

    #[test]
    fn empty_file_is_empty_lexicon() {
        let l = lex("");
        assert_eq!((l.positive_len(), l.negative_len()), (0, 0));
    }

    #[test]
    fn count_examples() {
        let l = lex("[positive]\ngood\nhappi*\n[negative]\nbad\n");
        assert_eq!(l.count_matches(&["good", "good", "bad"]), (2, 1));
        assert_eq!(l.count_matches(&["happiness"]), (1, 0));
        assert_eq!(l.count_matches(&["tax", "plan"]), (0, 0));
    }

    #[test]
    fn literal_and_wildcard_count_once() {
        let l = lex("[positive]\nhappy\nhapp*\n");
        assert_eq!(l.count_matches(&["happy"]), (1, 0));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(Label::from_counts(2, 1), Label::Positive);
        assert_eq!(Label::from_counts(0, 0), Label::Neutral);
        assert_eq!(Label::from_counts(1, 3), Label::Negative);
        let l = lex("[positive]\ngood\n[negative]\nbad\n");
        let r = l.classify(&["good", "good", "bad"]);
        assert_eq!(
            r,
            SentimentResult {
                pos_count: 2,
                neg_count: 1,
                label: Label::Positive
            }
        );
    }

    #[test]
    fn demo_lexicon_size() {
        let l = SentimentLexicon::demo();
        assert!(l.positive_len() >= 35 && l.negative_len() >= 35);
    }
}
