//! Pipeline configuration.
//!
//! The config file is flat `key = value` lines; `#` starts a comment line.
//! Relative paths resolve against the config file's directory. Keys:
//!
//! | key                | default                 | meaning                                 |
//! |--------------------|-------------------------|-----------------------------------------|
//! | `documents`        | required                | JSONL or CSV document file              |
//! | `documents_format` | from extension          | `jsonl` or `csv`                        |
//! | `queries`          | bundled 2012 queries    | `candidate<TAB>q1\|q2` file             |
//! | `stoplist`         | bundled English list    | one word per line                       |
//! | `sentiment_lexicon`| bundled demo lexicon    | `[positive]`/`[negative]` file          |
//! | `issue_lexicon`    | bundled issue keywords  | five-section issue file                 |
//! | `survey`           | bundled Pew Sept. 2012  | `issue,advantaged_candidate` CSV        |
//! | `out_dir`          | `out`                   | artifact directory                      |
//! | `topics`           | 100                     | topics per partition (K)                |
//! | `alpha`            | 5.0 / K                 | per-topic document prior                |
//! | `beta`             | 0.01                    | topic-word prior                        |
//! | `iterations`       | 1000                    | Gibbs sweeps                            |
//! | `seed`             | 42                      | master seed                             |
//! | `min_word_count`   | 1                       | vocabulary floor                        |
//! | `trace_interval`   | 50                      | sweeps between likelihood trace points  |
//! | `top_words`        | 10                      | top words stored per topic              |
//! | `issue_top_n`      | 10                      | top words used for issue matching       |
//! | `dedup`            | false                   | collapse exact-duplicate texts          |
//! | `drop_query_terms` | false                   | remove candidate query words before LDA |
//! | `duplicate_ids`    | `skip`                  | `skip` or `fail`                        |
//! | `formats`          | `md,json`               | report formats: `md`, `json`, `csv`     |
//! | `model_format`     | `json`                  | model dumps: `json` or `binary`         |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use opinion_core::corpus::{DocFormat, DuplicateIdPolicy};
use opinion_core::lda::{LdaConfig, MALLET_ALPHA_SUM};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Md,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(ReportFormat::Md),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(CliError::Config(format!("unknown report format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFormat {
    Json,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub documents: PathBuf,
    pub documents_format: DocFormat,
    pub queries: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub issue_lexicon: Option<PathBuf>,
    pub survey: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub lda: LdaConfig,
    pub top_words: usize,
    pub issue_top_n: usize,
    pub dedup: bool,
    pub drop_query_terms: bool,
    pub duplicate_ids: DuplicateIdPolicy,
    pub formats: Vec<ReportFormat>,
    pub model_format: ModelFormat,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub dedup: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub drop_query_terms: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<ReportFormat>>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }
}

const KEYS: &[&str] = &[
    "documents",
    "documents_format",
    "queries",
    "stoplist",
    "sentiment_lexicon",
    "issue_lexicon",
    "survey",
    "out_dir",
    "topics",
    "alpha",
    "beta",
    "iterations",
    "seed",
    "min_word_count",
    "trace_interval",
    "top_words",
    "issue_top_n",
    "dedup",
    "drop_query_terms",
    "duplicate_ids",
    "formats",
    "model_format",
];

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", idx + 1)))?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", idx + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: key `{key}` set twice", idx + 1)));
        }
    }
    Ok(out)
}

fn num<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`")))
        })
        .transpose()
}

fn boolean(map: &BTreeMap<String, String>, key: &str) -> Result<bool> {
    match map.get(key).map(|v| v.to_ascii_lowercase()) {
        None => Ok(false),
        Some(v) if matches!(v.as_str(), "true" | "yes" | "1" | "on") => Ok(true),
        Some(v) if matches!(v.as_str(), "false" | "no" | "0" | "off") => Ok(false),
        Some(v) => Err(CliError::Config(format!("`{key}`: expected a boolean, got `{v}`"))),
    }
}

pub fn parse_formats(list: &str) -> Result<Vec<ReportFormat>> {
    let mut formats = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>>>()?;
    formats.sort();
    formats.dedup();
    if formats.is_empty() {
        return Err(CliError::Config("`formats` is empty".into()));
    }
    Ok(formats)
}

impl PipelineConfig {
    /// Parses config text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let map = parse_kv(text)?;
        let path = |key: &str| map.get(key).map(|v| base.join(v));
        let documents = path("documents").ok_or_else(|| CliError::Config("`documents` is required".into()))?;
        let documents_format = match map.get("documents_format") {
            Some(f) => f.parse().map_err(|e| CliError::Config(format!("{e}")))?,
            None => DocFormat::from_path(&documents),
        };

        let k: usize = num(&map, "topics")?.unwrap_or(opinion_core::lda::DEFAULT_TOPICS);
        let mut lda = LdaConfig::with_topics(k);
        if let Some(a) = num(&map, "alpha")? {
            lda.alpha = a;
        }
        if let Some(b) = num(&map, "beta")? {
            lda.beta = b;
        }
        if let Some(it) = num(&map, "iterations")? {
            lda.iterations = it;
        }
        if let Some(s) = num(&map, "seed")? {
            lda.seed = s;
        }
        if let Some(m) = num(&map, "min_word_count")? {
            lda.min_word_count = m;
        }
        if let Some(t) = num(&map, "trace_interval")? {
            lda.trace_interval = t;
        }
        let duplicate_ids = match map.get("duplicate_ids").map(|s| s.to_ascii_lowercase()) {
            None => DuplicateIdPolicy::Skip,
            Some(s) if s == "skip" => DuplicateIdPolicy::Skip,
            Some(s) if s == "fail" => DuplicateIdPolicy::Fail,
            Some(s) => {
                return Err(CliError::Config(format!(
                    "`duplicate_ids`: expected skip or fail, got `{s}`"
                )))
            }
        };
        let model_format = match map.get("model_format").map(|s| s.to_ascii_lowercase()) {
            None => ModelFormat::Json,
            Some(s) if s == "json" => ModelFormat::Json,
            Some(s) if s == "binary" => ModelFormat::Binary,
            Some(s) => {
                return Err(CliError::Config(format!(
                    "`model_format`: expected json or binary, got `{s}`"
                )))
            }
        };
        let config = Self {
            documents,
            documents_format,
            queries: path("queries"),
            stoplist: path("stoplist"),
            sentiment_lexicon: path("sentiment_lexicon"),
            issue_lexicon: path("issue_lexicon"),
            survey: path("survey"),
            out_dir: path("out_dir").unwrap_or_else(|| base.join("out")),
            lda,
            top_words: num(&map, "top_words")?.unwrap_or(10),
            issue_top_n: num(&map, "issue_top_n")?.unwrap_or(opinion_core::issues::DEFAULT_TOP_N),
            dedup: boolean(&map, "dedup")?,
            drop_query_terms: boolean(&map, "drop_query_terms")?,
            duplicate_ids,
            formats: match map.get("formats") {
                Some(f) => parse_formats(f)?,
                None => vec![ReportFormat::Md, ReportFormat::Json],
            },
            model_format,
        };
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Applies command-line overrides. A `--k` without an explicit alpha in
    /// the file re-derives alpha as 5.0 / K.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.lda.seed = seed;
        }
        if let Some(k) = o.k {
            let default_alpha = MALLET_ALPHA_SUM / self.lda.num_topics.max(1) as f64;
            if self.lda.alpha == default_alpha {
                self.lda.alpha = MALLET_ALPHA_SUM / k.max(1) as f64;
            }
            self.lda.num_topics = k;
        }
        if let Some(dir) = &o.out_dir {
            self.out_dir = dir.clone();
        }
        self.dedup |= o.dedup;
        self.drop_query_terms |= o.drop_query_terms;
        if let Some(f) = &o.formats {
            self.formats = f.clone();
        }
    }

    /// Checks every referenced input exists and the LDA settings are valid,
    /// then makes sure the output directory exists.
    pub fn validate(&self) -> Result<()> {
        let inputs = [
            ("documents", Some(&self.documents)),
            ("queries", self.queries.as_ref()),
            ("stoplist", self.stoplist.as_ref()),
            ("sentiment_lexicon", self.sentiment_lexicon.as_ref()),
            ("issue_lexicon", self.issue_lexicon.as_ref()),
            ("survey", self.survey.as_ref()),
        ];
        for (key, path) in inputs {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(CliError::Config(format!("`{key}` file {} does not exist", p.display())));
                }
            }
        }
        self.lda.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.top_words == 0 || self.issue_top_n == 0 {
            return Err(CliError::Config(
                "`top_words` and `issue_top_n` must be positive".into(),
            ));
        }
        std::fs::create_dir_all(&self.out_dir).map_err(|e| {
            CliError::Config(format!(
                "output directory {} is not writable: {e}",
                self.out_dir.display()
            ))
        })?;
        Ok(())
    }
}
