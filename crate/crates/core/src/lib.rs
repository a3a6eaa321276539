//! Economic public-opinion mining over election tweets.
//!
//! Documents are matched to candidates, labeled by lexicon sentiment,
//! split into (candidate, polarity) partitions, topic-modeled with LDA,
//! mapped to five economic issues, and scored with DPNT (positive minus
//! negative topic count per issue).

pub mod corpus;
pub mod dpnt;
pub mod issues;
pub mod lda;
pub mod lexicon;
pub mod sentiment;
pub mod synthetic;

pub use corpus::{CandidateQuerySet, CleanDocument, CorpusPartition, Polarity, RawDocument, Stoplist};
pub use dpnt::{Advantage, AdvantageTable, DpntReport, DpntTable, SurveyTable};
pub use issues::{Issue, IssueAssignment, IssueLexicon};
pub use lda::{LdaConfig, LdaState, TopicSummary, TrainedModel};
pub use sentiment::{Label, SentimentLexicon, SentimentResult};
