//! Word patterns with LIWC-style prefix wildcards, and the sectioned text
//! format shared by the sentiment and issue lexicon files.
//!
//! A pattern is either a literal lowercase word (`tax`) or a stem followed by
//! `*` (`tax*`), which matches every token starting with the stem.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// Shortest stem accepted for a `stem*` wildcard.
pub const MIN_STEM_LEN: usize = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: entry `{entry}` appears before any section header")]
    EntryOutsideSection { line: usize, entry: String },
    #[error("line {line}: unknown section `[{section}]`")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: wildcard `{entry}` has a stem shorter than {MIN_STEM_LEN} characters")]
    StemTooShort { line: usize, entry: String },
    #[error("line {line}: entry `{entry}` contains whitespace")]
    Whitespace { line: usize, entry: String },
    #[error("entry `{entry}` is listed under both [positive] and [negative]")]
    Conflict { entry: String },
    #[error("missing required section `[{0}]`")]
    MissingSection(String),
    #[error("section `[{0}]` is empty")]
    EmptySection(String),
    #[error("section `[{0}]` appears more than once")]
    DuplicateSection(String),
}

/// One lexicon entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Literal(String),
    Prefix(String),
}

impl Pattern {
    /// Parses a single (already trimmed) entry, lowercasing it.
    pub fn parse(entry: &str) -> Result<Self, LexiconError> {
        let entry = entry.to_lowercase();
        if entry.chars().any(char::is_whitespace) {
            return Err(LexiconError::Whitespace { line: 0, entry });
        }
        match entry.strip_suffix('*') {
            Some(stem) if stem.chars().count() < MIN_STEM_LEN || stem.ends_with('*') => {
                Err(LexiconError::StemTooShort { line: 0, entry })
            }
            Some(stem) => Ok(Pattern::Prefix(stem.to_string())),
            None => Ok(Pattern::Literal(entry)),
        }
    }

    pub fn matches(&self, token: &str) -> bool {
        match self {
            Pattern::Literal(word) => token == word,
            Pattern::Prefix(stem) => token.starts_with(stem.as_str()),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Literal(w) => f.write_str(w),
            Pattern::Prefix(s) => write!(f, "{s}*"),
        }
    }
}

/// A compiled set of patterns.
///
/// Matching a token costs one hash lookup for the literal set plus one per
/// char boundary of the token for the stem set, independent of how many
/// wildcards the set holds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternSet {
    literals: HashSet<String>,
    stems: HashSet<String>,
    min_stem: usize,
    max_stem: usize,
}

impl PatternSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pattern: Pattern) -> bool {
        match pattern {
            Pattern::Literal(w) => self.literals.insert(w),
            Pattern::Prefix(s) => {
                let len = s.len();
                let inserted = self.stems.insert(s);
                if inserted {
                    if self.stems.len() == 1 {
                        self.min_stem = len;
                        self.max_stem = len;
                    } else {
                        self.min_stem = self.min_stem.min(len);
                        self.max_stem = self.max_stem.max(len);
                    }
                }
                inserted
            }
        }
    }

    pub fn contains(&self, pattern: &Pattern) -> bool {
        match pattern {
            Pattern::Literal(w) => self.literals.contains(w),
            Pattern::Prefix(s) => self.stems.contains(s),
        }
    }

    pub fn len(&self) -> usize {
        self.literals.len() + self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when `token` equals a literal or starts with a stem.
    pub fn matches(&self, token: &str) -> bool {
        if self.literals.contains(token) {
            return true;
        }
        if self.stems.is_empty() || token.len() < self.min_stem {
            return false;
        }
        let upper = self.max_stem.min(token.len());
        token
            .char_indices()
            .map(|(i, c)| i + c.len_utf8())
            .skip_while(|&end| end < self.min_stem)
            .take_while(|&end| end <= upper)
            .any(|end| self.stems.contains(&token[..end]))
    }

    /// All patterns in a stable order (literals then stems, each sorted).
    pub fn patterns(&self) -> Vec<Pattern> {
        let mut lits: Vec<_> = self.literals.iter().cloned().map(Pattern::Literal).collect();
        let mut stems: Vec<_> = self.stems.iter().cloned().map(Pattern::Prefix).collect();
        lits.sort();
        stems.sort();
        lits.extend(stems);
        lits
    }
}

impl FromIterator<Pattern> for PatternSet {
    fn from_iter<I: IntoIterator<Item = Pattern>>(iter: I) -> Self {
        let mut set = PatternSet::new();
        for p in iter {
            set.insert(p);
        }
        set
    }
}

/// Parsed contents of a sectioned lexicon file, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sections {
    pub sections: Vec<(String, Vec<Pattern>)>,
}

impl Sections {
    pub fn get(&self, name: &str) -> Option<&[Pattern]> {
        self.sections
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, p)| p.as_slice())
    }
}

/// Parses the `[section]` / one-entry-per-line format.
///
/// Blank lines and lines starting with `#` are ignored. Section names are
/// matched against `allowed` case-insensitively and stored in the spelling
/// given by `allowed`.
pub fn parse_sections(text: &str, allowed: &[&str]) -> Result<Sections, LexiconError> {
    let mut out = Sections::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            let canonical =
                allowed
                    .iter()
                    .find(|a| a.eq_ignore_ascii_case(name))
                    .ok_or_else(|| LexiconError::UnknownSection {
                        line: line_no,
                        section: name.to_string(),
                    })?;
            if out.get(canonical).is_some() {
                return Err(LexiconError::DuplicateSection(canonical.to_string()));
            }
            out.sections.push((canonical.to_string(), Vec::new()));
            continue;
        }
        let pattern = Pattern::parse(line).map_err(|e| match e {
            LexiconError::StemTooShort { entry, .. } => LexiconError::StemTooShort { line: line_no, entry },
            LexiconError::Whitespace { entry, .. } => LexiconError::Whitespace { line: line_no, entry },
            other => other,
        })?;
        match out.sections.last_mut() {
            Some((_, entries)) => entries.push(pattern),
            None => {
                return Err(LexiconError::EntryOutsideSection {
                    line: line_no,
                    entry: line.to_string(),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_literal_and_prefix() {
        assert_eq!(Pattern::parse("Good").unwrap(), Pattern::Literal("good".into()));
        assert_eq!(Pattern::parse("happi*").unwrap(), Pattern::Prefix("happi".into()));
        assert!(matches!(Pattern::parse("a*"), Err(LexiconError::StemTooShort { .. })));
        assert!(matches!(Pattern::parse("*"), Err(LexiconError::StemTooShort { .. })));
        assert!(matches!(Pattern::parse("ab**"), Err(LexiconError::StemTooShort { .. })));
    }

    #[test]
    fn set_matches_literal_and_stem() {
        let set: PatternSet = ["good", "happi*", "econom*"]
            .iter()
            .map(|e| Pattern::parse(e).unwrap())
            .collect();
        assert!(set.matches("good"));
        assert!(!set.matches("goods"));
        assert!(set.matches("happiness"));
        assert!(set.matches("happi"));
        assert!(!set.matches("happ"));
        assert!(set.matches("economy"));
        assert!(!set.matches(""));
    }

    #[test]
    fn set_matches_agrees_with_linear_scan() {
        let pats: Vec<Pattern> = ["ab*", "abcd*", "xyz", "ünï*"]
            .iter()
            .map(|e| Pattern::parse(e).unwrap())
            .collect();
        let set: PatternSet = pats.iter().cloned().collect();
        for tok in ["ab", "abc", "abcde", "xyz", "xyza", "ünïcode", "ün", "a", ""] {
            let brute = pats.iter().any(|p| p.matches(tok));
            assert_eq!(set.matches(tok), brute, "token {tok}");
        }
    }

    #[test]
    fn sections_parse() {
        let text = "# comment\n[positive]\ngood\nhappi*\n\n[negative]\nbad\n";
        let s = parse_sections(text, &["positive", "negative"]).unwrap();
        assert_eq!(s.get("positive").unwrap().len(), 2);
        assert_eq!(s.get("negative").unwrap(), &[Pattern::Literal("bad".into())]);
    }

    #[test]
    fn sections_errors() {
        assert!(matches!(
            parse_sections("good\n", &["positive"]),
            Err(LexiconError::EntryOutsideSection { line: 1, .. })
        ));
        assert!(matches!(
            parse_sections("[neutral]\n", &["positive"]),
            Err(LexiconError::UnknownSection { line: 1, .. })
        ));
        assert!(matches!(
            parse_sections("[positive]\nx*\n", &["positive"]),
            Err(LexiconError::StemTooShort { line: 2, .. })
        ));
        assert!(matches!(
            parse_sections("[positive]\n[POSITIVE]\n", &["positive"]),
            Err(LexiconError::DuplicateSection(_))
        ));
    }
}
