//! Latent Dirichlet allocation trained by collapsed Gibbs sampling.
//!
//! Defaults follow the Mallet toolkit: symmetric α = 5.0 / K, β = 0.01,
//! 1000 sweeps, no hyperparameter optimization. Tokens are visited in
//! document order then position order, and each token is resampled from
//!
//! ```text
//! P(z = k) ∝ (n_dk + α) · (n_kw + β) / (n_k + V·β)
//! ```
//!
//! with the token's own assignment removed from the counts.

mod dump;
pub mod rng;
mod vocab;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::corpus::CleanDocument;
pub use dump::{ModelDump, BINARY_MAGIC, BINARY_VERSION, TOP_WORDS_CSV_HEADER};
pub use rng::{derive_seed, SamplerRng};
pub use vocab::{build_vocab, IndexedCorpus, VocabMap};

/// Mallet's default sum of the document-topic prior.
pub const MALLET_ALPHA_SUM: f64 = 5.0;
pub const MALLET_BETA: f64 = 0.01;
pub const MALLET_ITERATIONS: usize = 1000;
pub const DEFAULT_TOPICS: usize = 100;
pub const DEFAULT_TRACE_INTERVAL: usize = 50;

#[derive(Debug, Error)]
pub enum LdaError {
    #[error("invalid LDA configuration: {0}")]
    InvalidConfig(String),
    #[error("partition too small to model: no word survives the vocabulary floor")]
    EmptyVocabulary,
    #[error("model dump I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("model dump JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed binary model dump: {0}")]
    BadDump(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Per-topic symmetric document prior.
    pub alpha: f64,
    /// Per-word topic prior.
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub min_word_count: usize,
    /// Sweeps between log-likelihood trace points.
    pub trace_interval: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self::with_topics(DEFAULT_TOPICS)
    }
}

impl LdaConfig {
    /// Mallet defaults for `k` topics.
    pub fn with_topics(k: usize) -> Self {
        Self {
            num_topics: k,
            alpha: MALLET_ALPHA_SUM / k.max(1) as f64,
            beta: MALLET_BETA,
            iterations: MALLET_ITERATIONS,
            seed: 42,
            min_word_count: 1,
            trace_interval: DEFAULT_TRACE_INTERVAL,
        }
    }

    pub fn validate(&self) -> Result<(), LdaError> {
        let bad = |m: String| Err(LdaError::InvalidConfig(m));
        if self.num_topics < 2 {
            return bad(format!("number of topics must be at least 2, got {}", self.num_topics));
        }
        if self.num_topics > u32::MAX as usize {
            return bad("number of topics exceeds u32 range".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.trace_interval == 0 {
            return bad("trace interval must be at least 1".into());
        }
        Ok(())
    }
}

/// Topic assignments and the count tables derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaState {
    num_topics: usize,
    vocab_size: usize,
    tokens: Vec<u32>,
    doc_starts: Vec<usize>,
    assignments: Vec<u32>,
    /// D × K, document-major.
    doc_topic: Vec<u32>,
    /// V × K, word-major so one token's topic column is contiguous.
    word_topic: Vec<u32>,
    topic_totals: Vec<u32>,
    rng: SamplerRng,
}

/// Count tables rebuilt from scratch; see [`LdaState::recount`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    pub doc_topic: Vec<u32>,
    pub word_topic: Vec<u32>,
    pub topic_totals: Vec<u32>,
}

impl LdaState {
    /// Assigns every token a uniform random topic from the seeded stream.
    ///
    /// Word indices must be below `vocab_size`.
    pub fn init(docs: &[Vec<u32>], vocab_size: usize, config: &LdaConfig) -> Self {
        let k = config.num_topics;
        assert!(k >= 1, "at least one topic");
        let mut rng = SamplerRng::from_seed(config.seed);
        let mut doc_starts = Vec::with_capacity(docs.len() + 1);
        let mut tokens = Vec::with_capacity(docs.iter().map(Vec::len).sum());
        doc_starts.push(0);
        for d in docs {
            tokens.extend_from_slice(d);
            doc_starts.push(tokens.len());
        }
        let assignments: Vec<u32> = tokens.iter().map(|_| rng.below(k as u32)).collect();
        let mut state = Self {
            num_topics: k,
            vocab_size,
            tokens,
            doc_starts,
            assignments,
            doc_topic: Vec::new(),
            word_topic: Vec::new(),
            topic_totals: Vec::new(),
            rng,
        };
        let counts = state.recount();
        state.doc_topic = counts.doc_topic;
        state.word_topic = counts.word_topic;
        state.topic_totals = counts.topic_totals;
        state
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn num_docs(&self) -> usize {
        self.doc_starts.len() - 1
    }

    pub fn num_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.doc_starts[d + 1] - self.doc_starts[d]
    }

    pub fn doc_tokens(&self, d: usize) -> &[u32] {
        &self.tokens[self.doc_starts[d]..self.doc_starts[d + 1]]
    }

    pub fn doc_assignments(&self, d: usize) -> &[u32] {
        &self.assignments[self.doc_starts[d]..self.doc_starts[d + 1]]
    }

    pub fn assignments(&self) -> &[u32] {
        &self.assignments
    }

    pub fn doc_topic(&self, d: usize, k: usize) -> u32 {
        self.doc_topic[d * self.num_topics + k]
    }

    pub fn topic_word(&self, k: usize, w: usize) -> u32 {
        self.word_topic[w * self.num_topics + k]
    }

    pub fn topic_total(&self, k: usize) -> u32 {
        self.topic_totals[k]
    }

    /// K × V topic-word counts, topic-major.
    pub fn topic_word_table(&self) -> Vec<Vec<u32>> {
        (0..self.num_topics)
            .map(|k| (0..self.vocab_size).map(|w| self.topic_word(k, w)).collect())
            .collect()
    }

    /// Rebuilds all count tables from the assignments alone.
    pub fn recount(&self) -> CountTables {
        let k = self.num_topics;
        let mut doc_topic = vec![0u32; self.num_docs() * k];
        let mut word_topic = vec![0u32; self.vocab_size * k];
        let mut topic_totals = vec![0u32; k];
        for d in 0..self.num_docs() {
            for (&w, &z) in self.doc_tokens(d).iter().zip(self.doc_assignments(d)) {
                doc_topic[d * k + z as usize] += 1;
                word_topic[w as usize * k + z as usize] += 1;
                topic_totals[z as usize] += 1;
            }
        }
        CountTables {
            doc_topic,
            word_topic,
            topic_totals,
        }
    }

    /// The stored tables, in the layout of [`LdaState::recount`].
    pub fn stored_counts(&self) -> CountTables {
        CountTables {
            doc_topic: self.doc_topic.clone(),
            word_topic: self.word_topic.clone(),
            topic_totals: self.topic_totals.clone(),
        }
    }

    /// Resamples every token once, in (document, position) order.
    pub fn sweep(&mut self, alpha: f64, beta: f64) {
        let k = self.num_topics;
        let vbeta = self.vocab_size as f64 * beta;
        let mut cumulative = vec![0.0f64; k];
        for d in 0..self.num_docs() {
            let (start, end) = (self.doc_starts[d], self.doc_starts[d + 1]);
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for i in start..end {
                let w = self.tokens[i] as usize;
                let old = self.assignments[i] as usize;
                let wt = &mut self.word_topic[w * k..(w + 1) * k];
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(dt[t]) + alpha) * (f64::from(wt[t]) + beta)
                        / (f64::from(self.topic_totals[t]) + vbeta);
                    cumulative[t] = total;
                }
                let u = self.rng.next_f64() * total;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                dt[new] += 1;
                wt[new] += 1;
                self.topic_totals[new] += 1;
                self.assignments[i] = new as u32;
            }
        }
    }

    /// Collapsed joint log-likelihood log P(w, z | α, β).
    pub fn log_likelihood(&self, alpha: f64, beta: f64) -> f64 {
        let k = self.num_topics;
        let v = self.vocab_size;
        let lg_alpha = ln_gamma(alpha);
        let lg_beta = ln_gamma(beta);
        let k_alpha = k as f64 * alpha;
        let v_beta = v as f64 * beta;

        let mut ll = 0.0;
        for d in 0..self.num_docs() {
            ll += ln_gamma(k_alpha) - ln_gamma(self.doc_len(d) as f64 + k_alpha);
            for &n in &self.doc_topic[d * k..(d + 1) * k] {
                if n > 0 {
                    ll += ln_gamma(f64::from(n) + alpha) - lg_alpha;
                }
            }
        }
        for t in 0..k {
            ll += ln_gamma(v_beta) - ln_gamma(f64::from(self.topic_totals[t]) + v_beta);
        }
        for &n in &self.word_topic {
            if n > 0 {
                ll += ln_gamma(f64::from(n) + beta) - lg_beta;
            }
        }
        ll
    }

    /// Relabels topic `k` as `perm[k]`.
    pub fn permute_topics(&mut self, perm: &[usize]) {
        assert_eq!(perm.len(), self.num_topics);
        for z in &mut self.assignments {
            *z = perm[*z as usize] as u32;
        }
        let counts = self.recount();
        self.doc_topic = counts.doc_topic;
        self.word_topic = counts.word_topic;
        self.topic_totals = counts.topic_totals;
    }

    /// Posterior mean topic-word distributions, K × V.
    pub fn phi(&self, beta: f64) -> Vec<Vec<f64>> {
        (0..self.num_topics).map(|k| self.phi_row(k, beta)).collect()
    }

    fn phi_row(&self, k: usize, beta: f64) -> Vec<f64> {
        let denom = f64::from(self.topic_totals[k]) + self.vocab_size as f64 * beta;
        (0..self.vocab_size)
            .map(|w| (f64::from(self.topic_word(k, w)) + beta) / denom)
            .collect()
    }

    /// Posterior mean document-topic distributions, D × K.
    pub fn theta(&self, alpha: f64) -> Vec<Vec<f64>> {
        let k = self.num_topics;
        (0..self.num_docs())
            .map(|d| {
                let denom = self.doc_len(d) as f64 + k as f64 * alpha;
                self.doc_topic[d * k..(d + 1) * k]
                    .iter()
                    .map(|&n| (f64::from(n) + alpha) / denom)
                    .collect()
            })
            .collect()
    }

    /// The `n` most probable word indices of topic `k` with their φ values,
    /// ties broken by ascending word index. `n` is clamped to V.
    pub fn top_word_indices(&self, k: usize, n: usize, beta: f64) -> Vec<(u32, f64)> {
        if n > self.vocab_size {
            log::warn!("requested {n} top words but vocabulary has {}", self.vocab_size);
        }
        let row = self.phi_row(k, beta);
        let mut idx: Vec<u32> = (0..self.vocab_size as u32).collect();
        idx.sort_by(|&a, &b| row[b as usize].total_cmp(&row[a as usize]).then(a.cmp(&b)));
        idx.truncate(n.min(self.vocab_size));
        idx.into_iter().map(|w| (w, row[w as usize])).collect()
    }
}

/// Top words of one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic: usize,
    pub words: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub sweep: usize,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: LdaConfig,
    pub vocab: VocabMap,
    pub doc_ids: Vec<String>,
    pub dropped_docs: usize,
    pub state: LdaState,
    pub trace: Vec<TracePoint>,
}

impl TrainedModel {
    pub fn phi(&self) -> Vec<Vec<f64>> {
        self.state.phi(self.config.beta)
    }

    pub fn theta(&self) -> Vec<Vec<f64>> {
        self.state.theta(self.config.alpha)
    }

    pub fn top_words(&self, k: usize, n: usize) -> TopicSummary {
        let words = self
            .state
            .top_word_indices(k, n, self.config.beta)
            .into_iter()
            .map(|(w, p)| (self.vocab.word(w).to_string(), p))
            .collect();
        TopicSummary { topic: k, words }
    }

    pub fn summaries(&self, n: usize) -> Vec<TopicSummary> {
        (0..self.config.num_topics).map(|k| self.top_words(k, n)).collect()
    }
}

/// Builds the vocabulary, initializes, and runs `config.iterations` sweeps.
///
/// The trace holds the log-likelihood after initialization (sweep 0), every
/// `trace_interval` sweeps, and after the final sweep.
pub fn train(docs: &[CleanDocument], config: &LdaConfig) -> Result<TrainedModel, LdaError> {
    config.validate()?;
    let (vocab, corpus) = build_vocab(docs, config.min_word_count)?;
    let mut state = LdaState::init(&corpus.docs, vocab.len(), config);
    let mut trace = vec![TracePoint {
        sweep: 0,
        log_likelihood: state.log_likelihood(config.alpha, config.beta),
    }];
    for sweep in 1..=config.iterations {
        state.sweep(config.alpha, config.beta);
        if sweep % config.trace_interval == 0 || sweep == config.iterations {
            trace.push(TracePoint {
                sweep,
                log_likelihood: state.log_likelihood(config.alpha, config.beta),
            });
        }
    }
    Ok(TrainedModel {
        config: config.clone(),
        vocab,
        doc_ids: corpus.doc_ids,
        dropped_docs: corpus.dropped_docs,
        state,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, seed: u64) -> LdaConfig {
        LdaConfig {
            seed,
            ..LdaConfig::with_topics(k)
        }
    }

    fn ten_tokens() -> Vec<Vec<u32>> {
        vec![vec![0, 1, 2, 3], vec![1, 1, 4], vec![0, 2, 4]]
    }

    #[test]
    fn defaults_are_mallet() {
        let c = LdaConfig::with_topics(100);
        assert_eq!(c.alpha, 0.05);
        assert_eq!(c.beta, 0.01);
        assert_eq!(c.iterations, 1000);
        assert_eq!(LdaConfig::default().num_topics, 100);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(2, 0).validate().is_ok());
        assert!(cfg(1, 0).validate().is_err());
        assert!(LdaConfig {
            iterations: 0,
            ..cfg(2, 0)
        }
        .validate()
        .is_err());
        assert!(LdaConfig {
            alpha: 0.0,
            ..cfg(2, 0)
        }
        .validate()
        .is_err());
        assert!(LdaConfig {
            beta: -1.0,
            ..cfg(2, 0)
        }
        .validate()
        .is_err());
        assert!(LdaConfig {
            beta: f64::NAN,
            ..cfg(2, 0)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn init_conserves_and_is_deterministic() {
        let a = LdaState::init(&ten_tokens(), 5, &cfg(2, 9));
        let b = LdaState::init(&ten_tokens(), 5, &cfg(2, 9));
        assert_eq!(a.topic_totals.iter().sum::<u32>(), 10);
        assert_eq!(a.assignments(), b.assignments());
        assert_eq!(a.recount(), a.stored_counts());

        let single = LdaState::init(&[vec![3]], 4, &cfg(2, 1));
        assert_eq!(single.doc_topic(0, 0) + single.doc_topic(0, 1), 1);
    }

    #[test]
    fn sweep_conserves_counts() {
        let mut s = LdaState::init(&ten_tokens(), 5, &cfg(3, 4));
        for _ in 0..20 {
            s.sweep(0.1, 0.01);
            assert_eq!(s.topic_totals.iter().sum::<u32>(), 10);
            assert_eq!(s.recount(), s.stored_counts());
        }
    }

    #[test]
    fn single_topic_never_moves() {
        let mut s = LdaState::init(&ten_tokens(), 5, &cfg(1, 4));
        for _ in 0..5 {
            s.sweep(5.0, 0.01);
        }
        assert!(s.assignments().iter().all(|&z| z == 0));
    }

    #[test]
    fn disjoint_vocabularies_separate() {
        // doc 0 uses words {0,1}, doc 1 uses {2,3}
        let docs = vec![
            [0u32, 1].iter().cycle().take(40).copied().collect::<Vec<_>>(),
            [2u32, 3].iter().cycle().take(40).copied().collect::<Vec<_>>(),
        ];
        let config = LdaConfig {
            iterations: 200,
            ..cfg(2, 11)
        };
        let mut s = LdaState::init(&docs, 4, &config);
        for _ in 0..config.iterations {
            s.sweep(config.alpha, config.beta);
        }
        for d in 0..2 {
            let dominant = (0..2).map(|k| s.doc_topic(d, k)).max().unwrap();
            assert!(f64::from(dominant) >= 0.9 * s.doc_len(d) as f64, "doc {d}: {dominant}");
        }
        let top0 = (0..2).max_by_key(|&k| s.doc_topic(0, k)).unwrap();
        let top1 = (0..2).max_by_key(|&k| s.doc_topic(1, k)).unwrap();
        assert_ne!(top0, top1);
    }

    #[test]
    fn phi_theta_posterior_means() {
        // n_kw = [3, 1] for topic 0, β = 0.5, V = 2 → φ = [0.7, 0.3]
        let mut s = LdaState::init(&[vec![0, 0, 0, 1]], 2, &cfg(2, 0));
        s.assignments = vec![0; 4];
        let c = s.recount();
        s.doc_topic = c.doc_topic;
        s.word_topic = c.word_topic;
        s.topic_totals = c.topic_totals;
        let phi = s.phi(0.5);
        assert!((phi[0][0] - 0.7).abs() < 1e-12);
        assert!((phi[0][1] - 0.3).abs() < 1e-12);
        // topic 1 has no tokens → uniform row
        assert_eq!(phi[1], vec![0.5, 0.5]);
        let theta = s.theta(1.0);
        assert!((theta[0][0] - 5.0 / 6.0).abs() < 1e-12);

        assert_eq!(s.top_word_indices(0, 1, 0.5), vec![(0, phi[0][0])]);
        let uniform: Vec<u32> = s.top_word_indices(1, 5, 0.5).iter().map(|p| p.0).collect();
        assert_eq!(uniform, vec![0, 1]);
    }

    #[test]
    fn zero_counts_phi_uniform() {
        let s = LdaState::init(&[vec![0]], 2, &cfg(2, 3));
        let empty_topic = (0..2).find(|&k| s.topic_total(k) == 0).unwrap();
        assert_eq!(s.phi(0.01)[empty_topic], vec![0.5, 0.5]);
    }

    #[test]
    fn train_rejects_zero_iterations() {
        let docs = vec![CleanDocument {
            id: "a".into(),
            tokens: vec!["x".into()],
        }];
        let err = train(
            &docs,
            &LdaConfig {
                iterations: 0,
                ..cfg(2, 0)
            },
        )
        .unwrap_err();
        assert!(matches!(err, LdaError::InvalidConfig(_)));
    }

    #[test]
    fn trace_points() {
        let docs = vec![CleanDocument {
            id: "a".into(),
            tokens: ["x", "y", "z"].iter().map(|s| s.to_string()).collect(),
        }];
        let config = LdaConfig {
            iterations: 120,
            ..cfg(2, 0)
        };
        let m = train(&docs, &config).unwrap();
        let sweeps: Vec<usize> = m.trace.iter().map(|t| t.sweep).collect();
        assert_eq!(sweeps, vec![0, 50, 100, 120]);
    }
}
