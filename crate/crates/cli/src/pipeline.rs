//! Stage implementations and the end-to-end runner.
//!
//! Each stage reads the previous stage's files from the output directory
//! and writes its own:
//!
//! | stage       | reads                            | writes                                   |
//! |-------------|----------------------------------|------------------------------------------|
//! | `ingest`    | documents, queries, stoplist     | `ingest.jsonl`                           |
//! | `sentiment` | `ingest.jsonl`, lexicon          | `sentiment.jsonl`                        |
//! | `topics`    | `ingest.jsonl`, `sentiment.jsonl`| `topics/index.json`, model dumps, CSVs   |
//! | `issues`    | `topics/`, issue lexicon         | `issues.json`, `issues.csv`              |
//! | `report`    | `issues.json`, `sentiment.jsonl`, survey | `report.{md,json,csv}`           |

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use opinion_core::corpus::{
    self, builtin_queries, dedup_exact_texts, match_candidates, partition_corpus, remove_stopwords, tokenize,
    CandidateQuerySet, CleanDocument, DocumentStream, LabeledDocument, Polarity, Stoplist,
};
use opinion_core::dpnt::{DpntReport, DpntTable, SentimentCounts, SurveyTable};
use opinion_core::issues::{
    assign_issue, filter_economic_topics, write_audit_csv, Issue, IssueAssignment, IssueLexicon,
};
use opinion_core::lda::{self, derive_seed, LdaError, ModelDump};
use opinion_core::sentiment::{Label, SentimentLexicon};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{ModelFormat, Overrides, PipelineConfig, ReportFormat};
use crate::error::{CliError, Result, Stage};
use crate::manifest::{IngestCounts, PartitionEntry, RunManifest, StageEntry, StageStatus};

pub const INGEST_FILE: &str = "ingest.jsonl";
pub const SENTIMENT_FILE: &str = "sentiment.jsonl";
pub const TOPICS_DIR: &str = "topics";
pub const TOPICS_INDEX: &str = "index.json";
pub const ISSUES_JSON: &str = "issues.json";
pub const ISSUES_CSV: &str = "issues.csv";

/// One matched document after cleaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub candidates: Vec<String>,
    /// Tokenizer output, used for sentiment.
    pub tokens: Vec<String>,
    /// Tokens with stopwords removed, used for topic modeling.
    pub clean: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentRecord {
    pub id: String,
    pub candidates: Vec<String>,
    pub pos: usize,
    pub neg: usize,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicsIndex {
    pub candidates: Vec<String>,
    pub partitions: Vec<PartitionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionIssues {
    pub partition: String,
    pub candidate: String,
    pub polarity: Polarity,
    pub counts: BTreeMap<Issue, usize>,
    pub assignments: Vec<IssueAssignment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssuesArtifact {
    pub candidates: Vec<String>,
    pub partitions: Vec<PartitionIssues>,
}

/// Input resources resolved from the config, falling back to bundled ones.
struct Inputs;

impl Inputs {
    fn queries(cfg: &PipelineConfig, stage: Stage) -> Result<Vec<CandidateQuerySet>> {
        let sets = match &cfg.queries {
            Some(p) => corpus::load_queries(p).map_err(|e| CliError::stage(stage, e))?,
            None => builtin_queries(),
        };
        if sets.is_empty() {
            return Err(CliError::stage(stage, "query file defines no candidates"));
        }
        Ok(sets)
    }

    fn stoplist(cfg: &PipelineConfig) -> Result<Stoplist> {
        match &cfg.stoplist {
            Some(p) => Stoplist::load(p).map_err(|e| CliError::stage(Stage::Ingest, e)),
            None => Ok(Stoplist::english()),
        }
    }

    fn sentiment(cfg: &PipelineConfig) -> Result<SentimentLexicon> {
        match &cfg.sentiment_lexicon {
            Some(p) => SentimentLexicon::load(p).map_err(|e| CliError::stage(Stage::Sentiment, e)),
            None => Ok(SentimentLexicon::demo()),
        }
    }

    fn issues(cfg: &PipelineConfig) -> Result<IssueLexicon> {
        match &cfg.issue_lexicon {
            Some(p) => IssueLexicon::load(p).map_err(|e| CliError::stage(Stage::Issues, e)),
            None => Ok(IssueLexicon::builtin()),
        }
    }

    fn survey(cfg: &PipelineConfig) -> Result<SurveyTable> {
        match &cfg.survey {
            Some(p) => SurveyTable::load(p).map_err(|e| CliError::stage(Stage::Report, e)),
            None => Ok(SurveyTable::pew_september_2012()),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| CliError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Opens an upstream artifact, mapping a missing file to an error that
/// names the stage producing it.
fn open_artifact(path: &Path, stage: Stage, needed: Stage) -> Result<BufReader<File>> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(CliError::MissingArtifact {
            stage,
            needed,
            path: path.to_path_buf(),
        }),
        Err(e) => Err(CliError::io(path, e)),
    }
}

fn read_jsonl<T: DeserializeOwned>(path: &Path, stage: Stage, needed: Stage) -> Result<Vec<T>> {
    let reader = open_artifact(path, stage, needed)?;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line)
            .map_err(|e| CliError::stage(stage, format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(row);
    }
    Ok(out)
}

fn read_json<T: DeserializeOwned>(path: &Path, stage: Stage, needed: Stage) -> Result<T> {
    let reader = open_artifact(path, stage, needed)?;
    serde_json::from_reader(reader).map_err(|e| CliError::stage(stage, format!("{}: {e}", path.display())))
}

/// Output of one stage, recorded into the manifest.
enum StageCounts {
    Ingest(IngestCounts),
    Sentiment(Vec<SentimentCounts>),
    Topics(Vec<PartitionEntry>),
    Issues(BTreeMap<String, BTreeMap<Issue, usize>>),
    Report,
}

pub fn ingest(cfg: &PipelineConfig) -> Result<IngestCounts> {
    let queries = Inputs::queries(cfg, Stage::Ingest)?;
    let stoplist = Inputs::stoplist(cfg)?;
    let mut stream =
        DocumentStream::open(&cfg.documents, cfg.documents_format, cfg.duplicate_ids).map_err(|e| match e {
            corpus::CorpusError::Io { path, source } => CliError::io(path, source),
            other => CliError::stage(Stage::Ingest, other),
        })?;
    let mut docs = stream.by_ref().collect::<Result<Vec<_>, _>>().map_err(|e| match e {
        corpus::CorpusError::Io { path, source } => CliError::io(path, source),
        other => CliError::stage(Stage::Ingest, other),
    })?;
    let ingested = docs.len();
    let deduplicated = if cfg.dedup { dedup_exact_texts(&mut docs) } else { 0 };

    let records: Vec<IngestRecord> = docs
        .par_iter()
        .filter_map(|doc| {
            let candidates = match_candidates(&doc.text, &queries);
            if candidates.is_empty() {
                return None;
            }
            let tokens = tokenize(&doc.text);
            let clean = remove_stopwords(&tokens, &stoplist);
            Some(IngestRecord {
                id: doc.id.clone(),
                timestamp: doc.timestamp.clone(),
                candidates: candidates.into_iter().collect(),
                tokens,
                clean,
            })
        })
        .collect();

    write_jsonl(&cfg.out_dir.join(INGEST_FILE), &records)?;

    let mut per_candidate: BTreeMap<String, usize> = queries.iter().map(|q| (q.candidate.clone(), 0)).collect();
    for r in &records {
        for c in &r.candidates {
            *per_candidate.entry(c.clone()).or_default() += 1;
        }
    }
    Ok(IngestCounts {
        ingested,
        skipped: stream.skip_report(),
        deduplicated,
        matched: records.len(),
        unmatched: ingested - deduplicated - records.len(),
        matched_per_candidate: per_candidate,
    })
}

pub fn sentiment(cfg: &PipelineConfig) -> Result<Vec<SentimentCounts>> {
    let docs: Vec<IngestRecord> = read_jsonl(&cfg.out_dir.join(INGEST_FILE), Stage::Sentiment, Stage::Ingest)?;
    let queries = Inputs::queries(cfg, Stage::Sentiment)?;
    let lexicon = Inputs::sentiment(cfg)?;
    let records: Vec<SentimentRecord> = docs
        .par_iter()
        .map(|d| {
            let r = lexicon.classify(&d.tokens);
            SentimentRecord {
                id: d.id.clone(),
                candidates: d.candidates.clone(),
                pos: r.pos_count,
                neg: r.neg_count,
                label: r.label,
            }
        })
        .collect();
    write_jsonl(&cfg.out_dir.join(SENTIMENT_FILE), &records)?;
    let candidates: Vec<String> = queries.iter().map(|q| q.candidate.clone()).collect();
    Ok(tally_sentiment(&records, &candidates))
}

/// Per-candidate label counts, in `candidates` order.
pub fn tally_sentiment(records: &[SentimentRecord], candidates: &[String]) -> Vec<SentimentCounts> {
    candidates
        .iter()
        .map(|c| {
            let mut s = SentimentCounts {
                candidate: c.clone(),
                ..Default::default()
            };
            for r in records.iter().filter(|r| r.candidates.contains(c)) {
                s.matched += 1;
                match r.label {
                    Label::Positive => s.positive += 1,
                    Label::Negative => s.negative += 1,
                    Label::Neutral => s.neutral += 1,
                }
            }
            s
        })
        .collect()
}

fn model_file_name(partition: &str, format: ModelFormat) -> String {
    match format {
        ModelFormat::Json => format!("{partition}.json"),
        ModelFormat::Binary => format!("{partition}.bin"),
    }
}

pub fn topics(cfg: &PipelineConfig) -> Result<Vec<PartitionEntry>> {
    let ingest: Vec<IngestRecord> = read_jsonl(&cfg.out_dir.join(INGEST_FILE), Stage::Topics, Stage::Ingest)?;
    let labels: Vec<SentimentRecord> = read_jsonl(&cfg.out_dir.join(SENTIMENT_FILE), Stage::Topics, Stage::Sentiment)?;
    let queries = Inputs::queries(cfg, Stage::Topics)?;
    let label_by_id: HashMap<&str, Label> = labels.iter().map(|r| (r.id.as_str(), r.label)).collect();

    let mut labeled = Vec::with_capacity(ingest.len());
    for rec in &ingest {
        let label = *label_by_id.get(rec.id.as_str()).ok_or_else(|| {
            CliError::stage(
                Stage::Topics,
                format!("document `{}` has no sentiment label; rerun sentiment", rec.id),
            )
        })?;
        labeled.push(LabeledDocument {
            doc: CleanDocument {
                id: rec.id.clone(),
                tokens: rec.clean.clone(),
            },
            candidates: rec.candidates.iter().cloned().collect(),
            label,
        });
    }
    let candidates: Vec<String> = queries.iter().map(|q| q.candidate.clone()).collect();
    let mut partitioning = partition_corpus(&labeled, &candidates);
    if cfg.drop_query_terms {
        for part in &mut partitioning.partitions {
            let terms: BTreeSet<String> = queries
                .iter()
                .filter(|q| q.candidate == part.candidate)
                .flat_map(|q| q.query_terms())
                .collect();
            for doc in &mut part.documents {
                doc.tokens.retain(|t| !terms.contains(t));
            }
        }
    }

    let dir = cfg.out_dir.join(TOPICS_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let trained: Vec<Result<(PartitionEntry, Option<ModelDump>)>> = partitioning
        .partitions
        .par_iter()
        .enumerate()
        .map(|(i, part)| {
            let name = part.name();
            let mut lda_cfg = cfg.lda.clone();
            lda_cfg.seed = derive_seed(cfg.lda.seed, i as u64);
            let mut entry = PartitionEntry {
                partition: name.clone(),
                candidate: part.candidate.clone(),
                polarity: part.polarity,
                documents: part.documents.len(),
                dropped_docs: 0,
                vocab_size: 0,
                tokens: 0,
                seed: lda_cfg.seed,
                model: None,
            };
            match lda::train(&part.documents, &lda_cfg) {
                Ok(model) => {
                    entry.dropped_docs = model.dropped_docs;
                    entry.vocab_size = model.vocab.len();
                    entry.tokens = model.state.num_tokens();
                    entry.model = Some(model_file_name(&name, cfg.model_format));
                    log::info!(
                        "{name}: {} docs, {} tokens, final log-likelihood {:.1}",
                        model.state.num_docs(),
                        entry.tokens,
                        model.trace.last().map_or(f64::NAN, |t| t.log_likelihood)
                    );
                    Ok((entry, Some(ModelDump::from_model(name, &model, cfg.top_words))))
                }
                Err(LdaError::EmptyVocabulary) => {
                    log::warn!("{name}: partition too small to model; contributes no topics");
                    entry.dropped_docs = part.documents.len();
                    Ok((entry, None))
                }
                Err(e) => Err(CliError::stage(Stage::Topics, format!("{name}: {e}"))),
            }
        })
        .collect();

    let mut entries = Vec::new();
    for result in trained {
        let (entry, dump) = result?;
        if let (Some(dump), Some(file)) = (dump, &entry.model) {
            let path = dir.join(file);
            match cfg.model_format {
                ModelFormat::Json => {
                    write_text(&path, &dump.to_json().map_err(|e| CliError::stage(Stage::Topics, e))?)?
                }
                ModelFormat::Binary => {
                    let mut w = create(&path)?;
                    dump.write_binary(&mut w)
                        .map_err(|e| CliError::stage(Stage::Topics, e))?;
                    w.flush().map_err(|e| CliError::io(&path, e))?;
                }
            }
            let csv_path = dir.join(format!("{}_top_words.csv", entry.partition));
            let mut w = create(&csv_path)?;
            dump.write_top_words_csv(&mut w)
                .map_err(|e| CliError::stage(Stage::Topics, e))?;
            w.flush().map_err(|e| CliError::io(&csv_path, e))?;
        }
        entries.push(entry);
    }
    let index = TopicsIndex {
        candidates,
        partitions: entries.clone(),
    };
    write_text(
        &dir.join(TOPICS_INDEX),
        &(serde_json::to_string_pretty(&index).expect("index serializes") + "\n"),
    )?;
    Ok(entries)
}

pub fn load_dump(path: &Path) -> Result<ModelDump> {
    let stage_err = |e: LdaError| CliError::stage(Stage::Issues, format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "bin") {
        let f = File::open(path).map_err(|e| CliError::io(path, e))?;
        ModelDump::read_binary(BufReader::new(f)).map_err(stage_err)
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        ModelDump::from_json(&text).map_err(stage_err)
    }
}

pub fn issues(cfg: &PipelineConfig) -> Result<BTreeMap<String, BTreeMap<Issue, usize>>> {
    let dir = cfg.out_dir.join(TOPICS_DIR);
    let index: TopicsIndex = read_json(&dir.join(TOPICS_INDEX), Stage::Issues, Stage::Topics)?;
    let lexicon = Inputs::issues(cfg)?;
    if cfg.issue_top_n > cfg.top_words {
        log::warn!(
            "issue_top_n = {} exceeds stored top_words = {}; matching uses the stored words",
            cfg.issue_top_n,
            cfg.top_words
        );
    }
    let mut partitions = Vec::new();
    for entry in &index.partitions {
        let assignments: Vec<IssueAssignment> = match &entry.model {
            Some(file) => load_dump(&dir.join(file))?
                .topics
                .iter()
                .map(|t| assign_issue(t, &lexicon, cfg.issue_top_n))
                .collect(),
            None => Vec::new(),
        };
        let grouped = filter_economic_topics(&assignments);
        partitions.push(PartitionIssues {
            partition: entry.partition.clone(),
            candidate: entry.candidate.clone(),
            polarity: entry.polarity,
            counts: Issue::ALL.iter().map(|&i| (i, grouped.get(i).len())).collect(),
            assignments,
        });
    }
    let audit = cfg.out_dir.join(ISSUES_CSV);
    let mut w = create(&audit)?;
    write_audit_csv(
        &mut w,
        partitions
            .iter()
            .flat_map(|p| p.assignments.iter().map(move |a| (p.partition.as_str(), a))),
    )
    .map_err(|e| CliError::stage(Stage::Issues, e))?;
    w.flush().map_err(|e| CliError::io(&audit, e))?;

    let artifact = IssuesArtifact {
        candidates: index.candidates,
        partitions,
    };
    write_text(
        &cfg.out_dir.join(ISSUES_JSON),
        &(serde_json::to_string_pretty(&artifact).expect("issues serialize") + "\n"),
    )?;
    Ok(artifact
        .partitions
        .iter()
        .map(|p| (p.partition.clone(), p.counts.clone()))
        .collect())
}

/// Builds the DPNT table from issue counts of the positive and negative
/// partitions of each candidate.
pub fn dpnt_table(artifact: &IssuesArtifact) -> DpntTable {
    let mut table = DpntTable::new(artifact.candidates.iter().cloned());
    for cand in &artifact.candidates {
        let count = |pol: Polarity, issue: Issue| {
            artifact
                .partitions
                .iter()
                .find(|p| &p.candidate == cand && p.polarity == pol)
                .and_then(|p| p.counts.get(&issue).copied())
                .unwrap_or(0) as u32
        };
        for issue in Issue::ALL {
            table.set(
                cand,
                issue,
                count(Polarity::Positive, issue),
                count(Polarity::Negative, issue),
            );
        }
    }
    table
}

pub fn report_file(out_dir: &Path, format: ReportFormat) -> PathBuf {
    out_dir.join(match format {
        ReportFormat::Md => "report.md",
        ReportFormat::Json => "report.json",
        ReportFormat::Csv => "report.csv",
    })
}

pub fn report(cfg: &PipelineConfig) -> Result<DpntReport> {
    let artifact: IssuesArtifact = read_json(&cfg.out_dir.join(ISSUES_JSON), Stage::Report, Stage::Issues)?;
    let labels: Vec<SentimentRecord> = read_jsonl(&cfg.out_dir.join(SENTIMENT_FILE), Stage::Report, Stage::Sentiment)?;
    let survey = Inputs::survey(cfg)?;
    let table = dpnt_table(&artifact);
    let sentiment = tally_sentiment(&labels, &artifact.candidates);
    let report = DpntReport::build(&table, Some(&survey), sentiment).map_err(|e| CliError::stage(Stage::Report, e))?;
    for &format in &cfg.formats {
        let path = report_file(&cfg.out_dir, format);
        match format {
            ReportFormat::Md => write_text(&path, &report.to_markdown())?,
            ReportFormat::Json => write_text(&path, &report.to_json())?,
            ReportFormat::Csv => {
                let mut text = String::from("candidate,issue,n_pos,n_neg,dpnt\n");
                for r in &report.records {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.candidate, r.issue, r.n_pos, r.n_neg, r.dpnt
                    ));
                }
                write_text(&path, &text)?;
            }
        }
    }
    Ok(report)
}

fn execute(cfg: &PipelineConfig, stage: Stage) -> Result<StageCounts> {
    Ok(match stage {
        Stage::Ingest => StageCounts::Ingest(ingest(cfg)?),
        Stage::Sentiment => StageCounts::Sentiment(sentiment(cfg)?),
        Stage::Topics => StageCounts::Topics(topics(cfg)?),
        Stage::Issues => StageCounts::Issues(issues(cfg)?),
        Stage::Report => {
            report(cfg)?;
            StageCounts::Report
        }
    })
}

fn run_recorded(cfg: &PipelineConfig, manifest: &mut RunManifest, stage: Stage, overrides: &Overrides) -> Result<()> {
    let start = Instant::now();
    let result = execute(cfg, stage);
    let wall_ms = start.elapsed().as_millis();
    let overrides = (!overrides.is_empty()).then(|| serde_json::to_value(overrides).expect("overrides serialize"));
    match result {
        Ok(counts) => {
            match counts {
                StageCounts::Ingest(c) => manifest.counts.ingest = Some(c),
                StageCounts::Sentiment(c) => manifest.counts.sentiment = Some(c),
                StageCounts::Topics(c) => manifest.counts.partitions = Some(c),
                StageCounts::Issues(c) => manifest.counts.topics_per_issue = Some(c),
                StageCounts::Report => {}
            }
            manifest.record(
                stage,
                StageEntry {
                    status: StageStatus::Complete,
                    wall_ms,
                    overrides,
                    error: None,
                },
            );
            manifest.save(&cfg.out_dir)
        }
        Err(err) => {
            manifest.record(
                stage,
                StageEntry {
                    status: StageStatus::Failed,
                    wall_ms,
                    overrides,
                    error: Some(err.to_string()),
                },
            );
            // the stage error takes precedence over a failure to save
            let _ = manifest.save(&cfg.out_dir);
            Err(err)
        }
    }
}

/// Runs a single stage against an already-validated config, updating the
/// manifest in the output directory.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage, overrides: &Overrides) -> Result<RunManifest> {
    let mut manifest = RunManifest::load_or_new(cfg)?;
    run_recorded(cfg, &mut manifest, stage, overrides)?;
    Ok(manifest)
}

/// Runs every stage in order with a fresh manifest.
pub fn run_pipeline(cfg: &PipelineConfig, overrides: &Overrides) -> Result<RunManifest> {
    let mut manifest = RunManifest::new(cfg);
    for stage in Stage::ALL {
        run_recorded(cfg, &mut manifest, stage, overrides)?;
    }
    Ok(manifest)
}
