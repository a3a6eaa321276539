//! Maps trained topics onto the five economic issues by keyword matching
//! over each topic's top words.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lda::TopicSummary;
use crate::lexicon::{parse_sections, LexiconError, PatternSet};

const DEFAULT_LEXICON: &str = include_str!("../resources/issues_default.lex");

/// Top words per topic inspected by [`assign_issue`] by default.
pub const DEFAULT_TOP_N: usize = 10;

#[derive(Debug, Error)]
pub enum IssueError {
    #[error("cannot read issue lexicon {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("unknown issue `{0}`")]
    UnknownIssue(String),
    #[error("writing issue audit: {0}")]
    Audit(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Issue {
    EconomyInGeneral,
    Job,
    BudgetDeficit,
    Healthcare,
    Tax,
}

impl Issue {
    /// All issues in taxonomy order.
    pub const ALL: [Issue; 5] = [
        Issue::EconomyInGeneral,
        Issue::Job,
        Issue::BudgetDeficit,
        Issue::Healthcare,
        Issue::Tax,
    ];

    pub fn ident(self) -> &'static str {
        match self {
            Issue::EconomyInGeneral => "EconomyInGeneral",
            Issue::Job => "Job",
            Issue::BudgetDeficit => "BudgetDeficit",
            Issue::Healthcare => "Healthcare",
            Issue::Tax => "Tax",
        }
    }

    /// Human-readable name used in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Issue::EconomyInGeneral => "Economy in General",
            Issue::Job => "Job",
            Issue::BudgetDeficit => "Budget Deficit",
            Issue::Healthcare => "Healthcare",
            Issue::Tax => "Tax",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ident())
    }
}

impl FromStr for Issue {
    type Err = IssueError;

    /// Accepts identifiers and display names, ignoring case, spaces and
    /// underscores (`Budget Deficit`, `budget_deficit`, `BudgetDeficit`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "economyingeneral" | "economy" => Ok(Issue::EconomyInGeneral),
            "job" | "jobs" => Ok(Issue::Job),
            "budgetdeficit" => Ok(Issue::BudgetDeficit),
            "healthcare" => Ok(Issue::Healthcare),
            "tax" | "taxes" => Ok(Issue::Tax),
            _ => Err(IssueError::UnknownIssue(s.to_string())),
        }
    }
}

/// Keyword sets for all five issues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssueLexicon {
    keywords: [PatternSet; 5],
}

impl IssueLexicon {
    pub fn parse(text: &str) -> Result<Self, IssueError> {
        let names: Vec<&str> = Issue::ALL.iter().map(|i| i.ident()).collect();
        let sections = parse_sections(text, &names)?;
        let mut keywords: [PatternSet; 5] = Default::default();
        for issue in Issue::ALL {
            let entries = sections
                .get(issue.ident())
                .ok_or_else(|| LexiconError::MissingSection(issue.ident().to_string()))?;
            if entries.is_empty() {
                return Err(LexiconError::EmptySection(issue.ident().to_string()).into());
            }
            keywords[issue.index()] = entries.iter().cloned().collect();
        }
        Ok(Self { keywords })
    }

    pub fn load(path: &Path) -> Result<Self, IssueError> {
        let text = std::fs::read_to_string(path).map_err(|source| IssueError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The bundled default lexicon.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled issue lexicon is valid")
    }

    pub fn keywords(&self, issue: Issue) -> &PatternSet {
        &self.keywords[issue.index()]
    }

    pub fn keywords_mut(&mut self, issue: Issue) -> &mut PatternSet {
        &mut self.keywords[issue.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueAssignment {
    pub topic: usize,
    /// `None` when unassigned.
    pub issue: Option<Issue>,
    /// Top words that matched the winning issue's keywords.
    pub matched: Vec<String>,
    /// Sum of the matched words' probabilities.
    pub score: f64,
}

impl IssueAssignment {
    fn unassigned(topic: usize) -> Self {
        Self {
            topic,
            issue: None,
            matched: Vec::new(),
            score: 0.0,
        }
    }
}

/// Picks the issue whose keywords match the most of the topic's first
/// `top_n` words. Equal match counts are broken by matched probability mass;
/// a remaining exact tie leaves the topic unassigned.
pub fn assign_issue(topic: &TopicSummary, lexicon: &IssueLexicon, top_n: usize) -> IssueAssignment {
    let words = &topic.words[..topic.words.len().min(top_n)];
    let mut best: Option<(Issue, Vec<String>, f64)> = None;
    let mut tied = false;
    for issue in Issue::ALL {
        let set = lexicon.keywords(issue);
        let hits: Vec<&(String, f64)> = words.iter().filter(|(w, _)| set.matches(w)).collect();
        if hits.is_empty() {
            continue;
        }
        let score: f64 = hits.iter().map(|(_, p)| p).sum();
        let matched: Vec<String> = hits.iter().map(|(w, _)| w.clone()).collect();
        match &best {
            None => best = Some((issue, matched, score)),
            Some((_, bm, bs)) => {
                let ord = matched.len().cmp(&bm.len()).then(score.total_cmp(bs));
                match ord {
                    std::cmp::Ordering::Greater => {
                        best = Some((issue, matched, score));
                        tied = false;
                    }
                    std::cmp::Ordering::Equal => tied = true,
                    std::cmp::Ordering::Less => {}
                }
            }
        }
    }
    match best {
        Some(_) if tied => {
            log::info!("topic {} ties between issues; left unassigned", topic.topic);
            IssueAssignment::unassigned(topic.topic)
        }
        Some((issue, matched, score)) => IssueAssignment {
            topic: topic.topic,
            issue: Some(issue),
            matched,
            score,
        },
        None => IssueAssignment::unassigned(topic.topic),
    }
}

/// Topic indices grouped by assigned issue (taxonomy order).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueTopics {
    pub topics: [Vec<usize>; 5],
}

impl IssueTopics {
    pub fn get(&self, issue: Issue) -> &[usize] {
        &self.topics[issue.index()]
    }

    pub fn counts(&self) -> [usize; 5] {
        [0, 1, 2, 3, 4].map(|i| self.topics[i].len())
    }
}

pub fn filter_economic_topics(assignments: &[IssueAssignment]) -> IssueTopics {
    let mut out = IssueTopics::default();
    for a in assignments {
        if let Some(issue) = a.issue {
            out.topics[issue.index()].push(a.topic);
        }
    }
    out
}

pub const AUDIT_CSV_HEADER: [&str; 5] = ["partition", "topic", "issue", "matched_keywords", "score"];

/// Writes `partition,topic,issue,matched_keywords,score` rows; matched words
/// are space-separated and unassigned topics carry issue `Unassigned`.
pub fn write_audit_csv<'a, W, I>(w: W, rows: I) -> Result<(), IssueError>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a IssueAssignment)>,
{
    let mut out = csv::Writer::from_writer(w);
    out.write_record(AUDIT_CSV_HEADER)?;
    for (partition, a) in rows {
        out.write_record([
            partition.to_string(),
            a.topic.to_string(),
            a.issue.map_or("Unassigned", Issue::ident).to_string(),
            a.matched.join(" "),
            a.score.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
