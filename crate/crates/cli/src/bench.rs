//! Throughput measurements for the two hot loops: lexicon classification
//! and Gibbs sweeps. Numbers are reported, never asserted.

use std::time::Instant;

use opinion_core::corpus::{remove_stopwords, tokenize, CleanDocument, Stoplist};
use opinion_core::lda::{build_vocab, LdaConfig, LdaState};
use opinion_core::sentiment::SentimentLexicon;
use opinion_core::synthetic::synthetic_tweets;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub documents: usize,
    pub sentiment_docs_per_sec: f64,
    pub gibbs_tokens: usize,
    pub gibbs_sweeps: usize,
    pub gibbs_topics: usize,
    pub gibbs_token_updates_per_sec: f64,
}

pub fn run(docs: usize, topics: usize, sweeps: usize, seed: u64) -> BenchResult {
    let raw = synthetic_tweets(docs, seed);
    let tokens: Vec<Vec<String>> = raw.iter().map(|d| tokenize(&d.text)).collect();
    let lexicon = SentimentLexicon::demo();

    let start = Instant::now();
    let mut labeled = 0usize;
    for t in &tokens {
        std::hint::black_box(lexicon.classify(t));
        labeled += 1;
    }
    let sentiment_secs = start.elapsed().as_secs_f64().max(1e-9);

    let stoplist = Stoplist::english();
    let clean: Vec<CleanDocument> = raw
        .iter()
        .zip(&tokens)
        .map(|(d, t)| CleanDocument {
            id: d.id.clone(),
            tokens: remove_stopwords(t, &stoplist),
        })
        .collect();
    let mut config = LdaConfig::with_topics(topics);
    config.seed = seed;
    let (vocab, corpus) = build_vocab(&clean, 1).expect("synthetic corpus has words");
    let mut state = LdaState::init(&corpus.docs, vocab.len(), &config);
    let start = Instant::now();
    for _ in 0..sweeps {
        state.sweep(config.alpha, config.beta);
    }
    let gibbs_secs = start.elapsed().as_secs_f64().max(1e-9);

    BenchResult {
        documents: labeled,
        sentiment_docs_per_sec: labeled as f64 / sentiment_secs,
        gibbs_tokens: state.num_tokens(),
        gibbs_sweeps: sweeps,
        gibbs_topics: topics,
        gibbs_token_updates_per_sec: (state.num_tokens() * sweeps) as f64 / gibbs_secs,
    }
}
