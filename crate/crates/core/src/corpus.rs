//! Document ingestion, candidate matching, text cleaning and partitioning.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sentiment::Label;

/// Longest accepted document text, in chars.
pub const MAX_TEXT_CHARS: usize = 10_000;

const BUILTIN_QUERIES: &str = include_str!("../resources/queries_2012.tsv");
const BUILTIN_STOPWORDS: &str = include_str!("../resources/stopwords_en.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("duplicate document id `{id}` at record {record}")]
    DuplicateId { id: String, record: usize },
    #[error("query file line {line}: {reason}")]
    BadQueryLine { line: usize, reason: String },
    #[error("unknown document format `{0}` (expected jsonl or csv)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub candidates: BTreeSet<String>,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            timestamp: None,
            text: text.into(),
            candidates: BTreeSet::new(),
        }
    }
}

/// Query phrases that select documents about one candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateQuerySet {
    pub candidate: String,
    pub queries: Vec<String>,
}

impl CandidateQuerySet {
    /// Builds a query set, lowercasing and whitespace-normalizing every query.
    /// Returns `None` when no nonempty query remains.
    pub fn new<I, S>(candidate: impl Into<String>, queries: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let queries: Vec<String> = queries
            .into_iter()
            .map(|q| normalize_for_matching(q.as_ref()))
            .filter(|q| !q.is_empty())
            .collect();
        if queries.is_empty() {
            return None;
        }
        Some(Self {
            candidate: candidate.into(),
            queries,
        })
    }

    /// Tokenized words of all queries, e.g. `#barackobama` → `barackobama`.
    pub fn query_terms(&self) -> BTreeSet<String> {
        self.queries.iter().flat_map(|q| tokenize(q)).collect()
    }
}

/// Parses the `candidate_id<TAB>query1|query2|...` format.
pub fn parse_queries(text: &str) -> Result<Vec<CandidateQuerySet>, CorpusError> {
    let mut sets: Vec<CandidateQuerySet> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (cand, queries) = line.split_once('\t').ok_or_else(|| CorpusError::BadQueryLine {
            line: line_no,
            reason: "expected `candidate<TAB>queries`".into(),
        })?;
        let cand = cand.trim();
        if cand.is_empty() {
            return Err(CorpusError::BadQueryLine {
                line: line_no,
                reason: "empty candidate id".into(),
            });
        }
        if sets.iter().any(|s| s.candidate == cand) {
            return Err(CorpusError::BadQueryLine {
                line: line_no,
                reason: format!("candidate `{cand}` listed twice"),
            });
        }
        let set = CandidateQuerySet::new(cand, queries.split('|')).ok_or_else(|| CorpusError::BadQueryLine {
            line: line_no,
            reason: format!("candidate `{cand}` has no queries"),
        })?;
        sets.push(set);
    }
    Ok(sets)
}

pub fn load_queries(path: &Path) -> Result<Vec<CandidateQuerySet>, CorpusError> {
    parse_queries(&read_to_string(path)?)
}

/// The Obama/Romney query lists used for the 2012 collection.
pub fn builtin_queries() -> Vec<CandidateQuerySet> {
    parse_queries(BUILTIN_QUERIES).expect("bundled query file is valid")
}

fn read_to_string(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocFormat {
    Jsonl,
    Csv,
}

impl DocFormat {
    /// Guesses the format from a file extension (`.csv` → CSV, else JSONL).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DocFormat::Csv,
            _ => DocFormat::Jsonl,
        }
    }
}

impl std::str::FromStr for DocFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(DocFormat::Jsonl),
            "csv" => Ok(DocFormat::Csv),
            _ => Err(CorpusError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DuplicateIdPolicy {
    #[default]
    Skip,
    Fail,
}

/// Per-run counts of records that were skipped during loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    /// Lines that are not valid JSON / CSV rows.
    pub unparsable: usize,
    /// Records without a string `id` and `text`, or with an empty id.
    pub missing_field: usize,
    /// Records whose text exceeds [`MAX_TEXT_CHARS`].
    pub too_long: usize,
    /// Records whose id was already seen (under [`DuplicateIdPolicy::Skip`]).
    pub duplicate_id: usize,
}

impl SkipReport {
    pub fn total(&self) -> usize {
        self.unparsable + self.missing_field + self.too_long + self.duplicate_id
    }
}

enum Source {
    Jsonl(io::Lines<BufReader<File>>),
    Csv {
        records: csv::StringRecordsIntoIter<File>,
        id: Option<usize>,
        text: Option<usize>,
        timestamp: Option<usize>,
    },
}

/// Streaming reader over a document file. Yields records in file order and
/// tallies skipped records in [`DocumentStream::skip_report`].
pub struct DocumentStream {
    path: PathBuf,
    source: Source,
    seen: HashSet<String>,
    policy: DuplicateIdPolicy,
    record: usize,
    skips: SkipReport,
}

impl DocumentStream {
    pub fn open(path: &Path, format: DocFormat, policy: DuplicateIdPolicy) -> Result<Self, CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::open(path).map_err(io_err)?;
        let source = match format {
            DocFormat::Jsonl => Source::Jsonl(BufReader::new(file).lines()),
            DocFormat::Csv => {
                let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
                let headers = reader.headers().map_err(|e| io_err(csv_to_io(e)))?.clone();
                let col = |name: &str| headers.iter().position(|h| h.trim() == name);
                Source::Csv {
                    id: col("id"),
                    text: col("text"),
                    timestamp: col("timestamp"),
                    records: reader.into_records(),
                }
            }
        };
        Ok(Self {
            path: path.to_path_buf(),
            source,
            seen: HashSet::new(),
            policy,
            record: 0,
            skips: SkipReport::default(),
        })
    }

    pub fn skip_report(&self) -> SkipReport {
        self.skips
    }

    /// Pulls the next raw record: `Ok(None)` at end of input, `Ok(Some(None))`
    /// for a record that was counted as skipped.
    fn next_record(&mut self) -> Result<Option<Option<RawDocument>>, CorpusError> {
        let parsed = match &mut self.source {
            Source::Jsonl(lines) => loop {
                let Some(line) = lines.next() else { return Ok(None) };
                let line = line.map_err(|source| CorpusError::Io {
                    path: self.path.clone(),
                    source,
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                break parse_json_record(&line);
            },
            Source::Csv {
                records,
                id,
                text,
                timestamp,
            } => {
                let Some(rec) = records.next() else { return Ok(None) };
                match rec {
                    Ok(rec) => {
                        let field = |idx: &Option<usize>| idx.and_then(|i| rec.get(i)).map(str::to_string);
                        match (field(id), field(text)) {
                            (Some(id), Some(text)) => Ok(RawDocument {
                                id,
                                timestamp: field(timestamp).filter(|t| !t.is_empty()),
                                text,
                                candidates: BTreeSet::new(),
                            }),
                            _ => Err(Skip::MissingField),
                        }
                    }
                    Err(e) if e.is_io_error() => {
                        return Err(CorpusError::Io {
                            path: self.path.clone(),
                            source: csv_to_io(e),
                        })
                    }
                    Err(_) => Err(Skip::Unparsable),
                }
            }
        };
        self.record += 1;
        let doc = match parsed {
            Ok(doc) => doc,
            Err(Skip::Unparsable) => {
                self.skips.unparsable += 1;
                return Ok(Some(None));
            }
            Err(Skip::MissingField) => {
                self.skips.missing_field += 1;
                return Ok(Some(None));
            }
        };
        if doc.id.is_empty() {
            self.skips.missing_field += 1;
            return Ok(Some(None));
        }
        if doc.text.chars().count() > MAX_TEXT_CHARS {
            self.skips.too_long += 1;
            return Ok(Some(None));
        }
        if !self.seen.insert(doc.id.clone()) {
            match self.policy {
                DuplicateIdPolicy::Skip => {
                    self.skips.duplicate_id += 1;
                    return Ok(Some(None));
                }
                DuplicateIdPolicy::Fail => {
                    return Err(CorpusError::DuplicateId {
                        id: doc.id,
                        record: self.record,
                    })
                }
            }
        }
        Ok(Some(Some(doc)))
    }
}

impl Iterator for DocumentStream {
    type Item = Result<RawDocument, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.next_record() {
                Ok(None) => return None,
                Ok(Some(None)) => continue,
                Ok(Some(Some(doc))) => return Some(Ok(doc)),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

enum Skip {
    Unparsable,
    MissingField,
}

fn parse_json_record(line: &str) -> Result<RawDocument, Skip> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|_| Skip::Unparsable)?;
    let obj = value.as_object().ok_or(Skip::Unparsable)?;
    let get = |key: &str| obj.get(key).and_then(|v| v.as_str()).map(str::to_string);
    match (get("id"), get("text")) {
        (Some(id), Some(text)) => Ok(RawDocument {
            id,
            timestamp: get("timestamp"),
            text,
            candidates: BTreeSet::new(),
        }),
        _ => Err(Skip::MissingField),
    }
}

fn csv_to_io(err: csv::Error) -> io::Error {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::new(io::ErrorKind::InvalidData, format!("{other:?}")),
    }
}

/// Reads a whole document file; see [`DocumentStream`].
pub fn load_documents(
    path: &Path,
    format: DocFormat,
    policy: DuplicateIdPolicy,
) -> Result<(Vec<RawDocument>, SkipReport), CorpusError> {
    let mut stream = DocumentStream::open(path, format, policy)?;
    let docs = stream.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok((docs, stream.skip_report()))
}

/// Collapses documents with byte-identical text, keeping the first.
/// Returns the number removed.
pub fn dedup_exact_texts(docs: &mut Vec<RawDocument>) -> usize {
    let before = docs.len();
    let mut seen = HashSet::new();
    docs.retain(|d| seen.insert(d.text.clone()));
    before - docs.len()
}

fn normalize_for_matching(text: &str) -> String {
    text.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Candidates whose query phrases occur in `text`.
///
/// Matching is on the lowercased, whitespace-collapsed text. An occurrence
/// counts only if it does not start or end inside an alphanumeric run, so
/// `#obama` matches in `go #obama!` but not in `#obamacare`.
pub fn match_candidates(text: &str, query_sets: &[CandidateQuerySet]) -> BTreeSet<String> {
    let haystack = normalize_for_matching(text);
    query_sets
        .iter()
        .filter(|set| set.queries.iter().any(|q| contains_bounded(&haystack, q)))
        .map(|set| set.candidate.clone())
        .collect()
}

fn contains_bounded(haystack: &str, needle: &str) -> bool {
    let (Some(first), Some(last)) = (needle.chars().next(), needle.chars().next_back()) else {
        return false;
    };
    haystack.match_indices(needle).any(|(start, _)| {
        let end = start + needle.len();
        let before_ok = !first.is_alphanumeric()
            || haystack[..start]
                .chars()
                .next_back()
                .is_none_or(|c| !c.is_alphanumeric());
        let after_ok = !last.is_alphanumeric() || haystack[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
        before_ok && after_ok
    })
}

fn is_url(token: &str) -> bool {
    token.starts_with("http://") || token.starts_with("https://") || token.starts_with("www.")
}

/// Splits tweet text into lowercase word tokens.
///
/// URLs and `@mentions` are dropped, hashtags keep their body, surrounding
/// punctuation is trimmed, and tokens shorter than two chars or made only of
/// digits are discarded.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let lower = raw.to_lowercase();
            if is_url(&lower) || lower.starts_with('@') {
                return None;
            }
            let body = lower.trim_matches(|c: char| !c.is_alphanumeric());
            if body.chars().count() < 2 || body.chars().all(char::is_numeric) || is_url(body) {
                return None;
            }
            Some(body.to_string())
        })
        .collect()
}

/// A set of lowercase words removed before topic modeling.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist(HashSet<String>);

impl Stoplist {
    /// Parses one word per line; `#` lines and blanks are ignored.
    pub fn parse(text: &str) -> Self {
        Stoplist(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Ok(Self::parse(&read_to_string(path)?))
    }

    /// Bundled English stoplist.
    pub fn english() -> Self {
        Self::parse(BUILTIN_STOPWORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stoplist {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stoplist(iter.into_iter().map(Into::into).collect())
    }
}

pub fn remove_stopwords(tokens: &[String], stoplist: &Stoplist) -> Vec<String> {
    tokens.iter().filter(|t| !stoplist.contains(t)).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanDocument {
    pub id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub const BOTH: [Polarity; 2] = [Polarity::Positive, Polarity::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }

    pub fn from_label(label: Label) -> Option<Self> {
        match label {
            Label::Positive => Some(Polarity::Positive),
            Label::Negative => Some(Polarity::Negative),
            Label::Neutral => None,
        }
    }
}

impl std::fmt::Display for Polarity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPartition {
    pub candidate: String,
    pub polarity: Polarity,
    pub documents: Vec<CleanDocument>,
}

impl CorpusPartition {
    /// `obama_positive` style name, used for artifact file names.
    pub fn name(&self) -> String {
        format!("{}_{}", self.candidate, self.polarity)
    }
}

/// A cleaned document with its candidate tags and sentiment label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub doc: CleanDocument,
    pub candidates: BTreeSet<String>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partitioning {
    /// One entry per (candidate, polarity), candidates in the given order,
    /// positive before negative.
    pub partitions: Vec<CorpusPartition>,
    /// Non-neutral documents dropped because they had no tokens left.
    pub empty_excluded: usize,
    pub neutral_excluded: usize,
}

/// Buckets labeled documents into per-(candidate, polarity) partitions.
///
/// Tags naming a candidate outside `candidates` are ignored.
pub fn partition_corpus(docs: &[LabeledDocument], candidates: &[String]) -> Partitioning {
    let mut partitions: Vec<CorpusPartition> = candidates
        .iter()
        .flat_map(|c| {
            Polarity::BOTH.into_iter().map(move |polarity| CorpusPartition {
                candidate: c.clone(),
                polarity,
                documents: Vec::new(),
            })
        })
        .collect();
    let mut empty_excluded = 0;
    let mut neutral_excluded = 0;
    for item in docs {
        let Some(polarity) = Polarity::from_label(item.label) else {
            neutral_excluded += 1;
            continue;
        };
        if item.doc.tokens.is_empty() {
            empty_excluded += 1;
            continue;
        }
        for part in partitions.iter_mut() {
            if part.polarity == polarity && item.candidates.contains(&part.candidate) {
                part.documents.push(item.doc.clone());
            }
        }
    }
    Partitioning {
        partitions,
        empty_excluded,
        neutral_excluded,
    }
}
