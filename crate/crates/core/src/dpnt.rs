//! DPNT scoring: the difference between the number of positive and negative
//! topics a candidate receives on an issue, and everything derived from it
//! (per-issue advantage, totals, issue salience, survey agreement, reports).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::issues::Issue;

const DEFAULT_SURVEY: &str = include_str!("../resources/survey_pew_2012_09.csv");

#[derive(Debug, Error)]
pub enum DpntError {
    #[error("no {issue} counts for candidate `{candidate}`")]
    MissingScore { candidate: String, issue: Issue },
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("no candidates to compare")]
    NoCandidates,
    #[error("survey table: {0}")]
    Survey(String),
    #[error("cannot read survey {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Positive minus negative topic count.
pub fn dpnt(n_pos: u32, n_neg: u32) -> i64 {
    i64::from(n_pos) - i64::from(n_neg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueTopicCounts {
    pub candidate: String,
    pub issue: Issue,
    pub n_pos: u32,
    pub n_neg: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpntScore {
    pub candidate: String,
    pub issue: Issue,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Advantage {
    Candidate(String),
    Tie,
}

impl Advantage {
    pub fn candidate(&self) -> Option<&str> {
        match self {
            Advantage::Candidate(c) => Some(c),
            Advantage::Tie => None,
        }
    }
}

impl fmt::Display for Advantage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Advantage::Candidate(c) => f.write_str(c),
            Advantage::Tie => f.write_str("Tie"),
        }
    }
}

impl Serialize for Advantage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Advantage {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == "Tie" {
            Advantage::Tie
        } else {
            Advantage::Candidate(s)
        })
    }
}

/// The candidate with the strictly greatest score, or `Tie` when the maximum
/// is shared.
pub fn advantage<S: AsRef<str>>(scores: &[(S, i64)]) -> Result<Advantage, DpntError> {
    let best = scores.iter().map(|(_, v)| *v).max().ok_or(DpntError::NoCandidates)?;
    let mut leaders = scores.iter().filter(|(_, v)| *v == best);
    let first = leaders.next().expect("max exists");
    Ok(if leaders.next().is_some() {
        Advantage::Tie
    } else {
        Advantage::Candidate(first.0.as_ref().to_string())
    })
}

/// Issues ordered by total topic count, descending; equal totals keep
/// taxonomy order.
pub fn issue_salience_rank(totals: [u32; 5]) -> Vec<(Issue, u32)> {
    let mut ranked: Vec<(Issue, u32)> = Issue::ALL.into_iter().zip(totals).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Per-candidate, per-issue positive/negative topic counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DpntTable {
    candidates: Vec<String>,
    counts: BTreeMap<(String, Issue), (u32, u32)>,
}

impl DpntTable {
    pub fn new<S: Into<String>>(candidates: impl IntoIterator<Item = S>) -> Self {
        Self {
            candidates: candidates.into_iter().map(Into::into).collect(),
            counts: BTreeMap::new(),
        }
    }

    /// Builds a table from a candidate's full row of `(n_pos, n_neg)` in
    /// taxonomy order.
    pub fn with_row(mut self, candidate: &str, row: [(u32, u32); 5]) -> Self {
        if !self.candidates.iter().any(|c| c == candidate) {
            self.candidates.push(candidate.to_string());
        }
        for (issue, (p, n)) in Issue::ALL.into_iter().zip(row) {
            self.set(candidate, issue, p, n);
        }
        self
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn set(&mut self, candidate: &str, issue: Issue, n_pos: u32, n_neg: u32) {
        self.counts.insert((candidate.to_string(), issue), (n_pos, n_neg));
    }

    pub fn counts(&self, candidate: &str, issue: Issue) -> Result<IssueTopicCounts, DpntError> {
        if !self.candidates.iter().any(|c| c == candidate) {
            return Err(DpntError::UnknownCandidate(candidate.to_string()));
        }
        let &(n_pos, n_neg) =
            self.counts
                .get(&(candidate.to_string(), issue))
                .ok_or_else(|| DpntError::MissingScore {
                    candidate: candidate.to_string(),
                    issue,
                })?;
        Ok(IssueTopicCounts {
            candidate: candidate.to_string(),
            issue,
            n_pos,
            n_neg,
        })
    }

    pub fn score(&self, candidate: &str, issue: Issue) -> Result<DpntScore, DpntError> {
        let c = self.counts(candidate, issue)?;
        Ok(DpntScore {
            candidate: c.candidate,
            issue,
            value: dpnt(c.n_pos, c.n_neg),
        })
    }

    pub fn advantage(&self, issue: Issue) -> Result<Advantage, DpntError> {
        let scores = self
            .candidates
            .iter()
            .map(|c| Ok((c.as_str(), self.score(c, issue)?.value)))
            .collect::<Result<Vec<_>, DpntError>>()?;
        advantage(&scores)
    }

    pub fn total_dpnt(&self, candidate: &str) -> Result<i64, DpntError> {
        Issue::ALL
            .iter()
            .map(|&i| self.score(candidate, i).map(|s| s.value))
            .sum()
    }

    pub fn salience_rank(&self, candidate: &str) -> Result<Vec<(Issue, u32)>, DpntError> {
        let mut totals = [0u32; 5];
        for issue in Issue::ALL {
            let c = self.counts(candidate, issue)?;
            totals[issue.index()] = c.n_pos + c.n_neg;
        }
        Ok(issue_salience_rank(totals))
    }

    pub fn advantage_table(&self) -> Result<AdvantageTable, DpntError> {
        let winners = Issue::ALL
            .iter()
            .map(|&i| Ok((i, self.advantage(i)?)))
            .collect::<Result<BTreeMap<_, _>, DpntError>>()?;
        let totals = self
            .candidates
            .iter()
            .map(|c| Ok((c.clone(), self.total_dpnt(c)?)))
            .collect::<Result<BTreeMap<_, _>, DpntError>>()?;
        Ok(AdvantageTable { winners, totals })
    }

    /// Every count as a flat record list, candidates in table order.
    pub fn records(&self) -> Result<Vec<DpntRecord>, DpntError> {
        let mut out = Vec::new();
        for c in &self.candidates {
            for issue in Issue::ALL {
                let counts = self.counts(c, issue)?;
                out.push(DpntRecord {
                    candidate: c.clone(),
                    issue,
                    n_pos: counts.n_pos,
                    n_neg: counts.n_neg,
                    dpnt: dpnt(counts.n_pos, counts.n_neg),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvantageTable {
    pub winners: BTreeMap<Issue, Advantage>,
    pub totals: BTreeMap<String, i64>,
}

/// Advantaged candidate per issue according to an external poll.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyTable {
    pub advantaged: BTreeMap<Issue, Advantage>,
}

impl SurveyTable {
    /// Parses `issue,advantaged_candidate` CSV with a header row. Every issue
    /// must appear exactly once.
    pub fn parse_csv(text: &str) -> Result<Self, DpntError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut advantaged = BTreeMap::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| DpntError::Survey(e.to_string()))?;
            let (Some(issue), Some(cand)) = (rec.get(0), rec.get(1)) else {
                return Err(DpntError::Survey(format!("short row {:?}", rec)));
            };
            let issue: Issue = issue
                .parse()
                .map_err(|_| DpntError::Survey(format!("unknown issue `{issue}`")))?;
            let adv = if cand.eq_ignore_ascii_case("tie") || cand.is_empty() {
                Advantage::Tie
            } else {
                Advantage::Candidate(cand.to_string())
            };
            if advantaged.insert(issue, adv).is_some() {
                return Err(DpntError::Survey(format!("issue {issue} listed twice")));
            }
        }
        let table = Self { advantaged };
        table.check_complete()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, DpntError> {
        let text = std::fs::read_to_string(path).map_err(|source| DpntError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(&text)
    }

    /// The September 2012 Pew column.
    pub fn pew_september_2012() -> Self {
        Self::parse_csv(DEFAULT_SURVEY).expect("bundled survey is valid")
    }

    fn check_complete(&self) -> Result<(), DpntError> {
        match Issue::ALL.iter().find(|i| !self.advantaged.contains_key(i)) {
            Some(missing) => Err(DpntError::Survey(format!("missing issue {missing}"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueMatch {
    pub issue: Issue,
    pub ours: Advantage,
    pub survey: Advantage,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyComparison {
    pub agreeing: usize,
    pub agreement: f64,
    pub issues: Vec<IssueMatch>,
}

/// Fraction of issues whose advantaged candidate matches the survey.
/// Candidate names compare case-insensitively; a tie on either side never
/// agrees.
pub fn compare_with_survey(adv: &AdvantageTable, survey: &SurveyTable) -> Result<SurveyComparison, DpntError> {
    survey.check_complete()?;
    let mut issues = Vec::with_capacity(5);
    for issue in Issue::ALL {
        let ours = adv
            .winners
            .get(&issue)
            .ok_or_else(|| DpntError::Survey(format!("advantage table lacks issue {issue}")))?;
        let theirs = &survey.advantaged[&issue];
        let agree = match (ours.candidate(), theirs.candidate()) {
            (Some(a), Some(b)) => a.eq_ignore_ascii_case(b),
            _ => false,
        };
        issues.push(IssueMatch {
            issue,
            ours: ours.clone(),
            survey: theirs.clone(),
            agree,
        });
    }
    let agreeing = issues.iter().filter(|m| m.agree).count();
    Ok(SurveyComparison {
        agreeing,
        agreement: agreeing as f64 / Issue::ALL.len() as f64,
        issues,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpntRecord {
    pub candidate: String,
    pub issue: Issue,
    pub n_pos: u32,
    pub n_neg: u32,
    pub dpnt: i64,
}

/// Per-candidate document sentiment tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentCounts {
    pub candidate: String,
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
    pub matched: usize,
}

/// Everything the report stage emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpntReport {
    pub records: Vec<DpntRecord>,
    pub advantage: BTreeMap<Issue, Advantage>,
    pub total_dpnt: BTreeMap<String, i64>,
    pub salience: BTreeMap<String, Vec<(Issue, u32)>>,
    pub survey_agreement: Option<f64>,
    pub survey: Option<SurveyComparison>,
    pub sentiment: Vec<SentimentCounts>,
}

impl DpntReport {
    pub fn build(
        table: &DpntTable,
        survey: Option<&SurveyTable>,
        sentiment: Vec<SentimentCounts>,
    ) -> Result<Self, DpntError> {
        let adv = table.advantage_table()?;
        let survey = survey.map(|s| compare_with_survey(&adv, s)).transpose()?;
        let salience = table
            .candidates()
            .iter()
            .map(|c| Ok((c.clone(), table.salience_rank(c)?)))
            .collect::<Result<BTreeMap<_, _>, DpntError>>()?;
        Ok(Self {
            records: table.records()?,
            advantage: adv.winners,
            total_dpnt: adv.totals,
            salience,
            survey_agreement: survey.as_ref().map(|s| s.agreement),
            survey,
            sentiment,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Markdown tables laid out like the classic DPNT analysis tables.
    pub fn to_markdown(&self) -> String {
        let mut md = String::from("# DPNT Report\n");
        if !self.sentiment.is_empty() {
            md.push_str("\n## Sentiment Analysis Statistics\n\n");
            md.push_str("| Candidate | Positive | Negative | Neutral | Matched |\n|---|---:|---:|---:|---:|\n");
            for s in &self.sentiment {
                let _ = writeln!(
                    md,
                    "| {} | {} | {} | {} | {} |",
                    s.candidate, s.positive, s.negative, s.neutral, s.matched
                );
            }
        }
        let header: Vec<&str> = Issue::ALL.iter().map(|i| i.display_name()).collect();
        let mut candidates: Vec<&str> = Vec::new();
        for r in &self.records {
            if !candidates.contains(&r.candidate.as_str()) {
                candidates.push(&r.candidate);
            }
        }
        for cand in candidates {
            let rows: Vec<&DpntRecord> = self.records.iter().filter(|r| r.candidate == cand).collect();
            let _ = write!(
                md,
                "\n## {cand} DPNT Analysis\n\n| Issues | {} |\n|---|",
                header.join(" | ")
            );
            md.push_str(&"---:|".repeat(header.len()));
            md.push('\n');
            let row = |label: String, cells: Vec<String>| format!("| {label} | {} |\n", cells.join(" | "));
            md.push_str(&row(
                format!("#Positive Topics for {cand}"),
                rows.iter().map(|r| r.n_pos.to_string()).collect(),
            ));
            md.push_str(&row(
                format!("#Negative Topics for {cand}"),
                rows.iter().map(|r| r.n_neg.to_string()).collect(),
            ));
            md.push_str(&row("DPNT".into(), rows.iter().map(|r| signed(r.dpnt)).collect()));
            if let Some(total) = self.total_dpnt.get(cand) {
                let _ = writeln!(md, "\nTotal DPNT: {}", signed(*total));
            }
            if let Some(rank) = self.salience.get(cand) {
                let items: Vec<String> = rank
                    .iter()
                    .map(|(i, n)| format!("{} ({n})", i.display_name()))
                    .collect();
                let _ = writeln!(md, "\nIssue salience: {}", items.join(", "));
            }
        }
        md.push_str("\n## Advantage\n\n");
        match &self.survey {
            Some(cmp) => {
                md.push_str(
                    "| Issue | Advantage in This Research | Advantage in the Survey | Agree |\n|---|---|---|---|\n",
                );
                for m in &cmp.issues {
                    let _ = writeln!(
                        md,
                        "| {} | {} | {} | {} |",
                        m.issue.display_name(),
                        m.ours,
                        m.survey,
                        if m.agree { "yes" } else { "no" }
                    );
                }
                let _ = writeln!(
                    md,
                    "\nSurvey agreement: {} of {} ({})",
                    cmp.agreeing,
                    cmp.issues.len(),
                    cmp.agreement
                );
            }
            None => {
                md.push_str("| Issue | Advantage in This Research |\n|---|---|\n");
                for (issue, adv) in &self.advantage {
                    let _ = writeln!(md, "| {} | {adv} |", issue.display_name());
                }
            }
        }
        md
    }
}

fn signed(v: i64) -> String {
    if v > 0 {
        format!("+{v}")
    } else {
        v.to_string()
    }
}
