//! Seeded generators for test corpora.
//!
//! Both generators draw from ChaCha8 via `rand`, a stream unrelated to the
//! sampler's own RNG, so they can serve as independent oracles.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::corpus::{CleanDocument, RawDocument};

/// A corpus generated from known topics.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub docs: Vec<CleanDocument>,
    /// Generating topic-word distributions, one row per planted topic.
    pub phi: Vec<Vec<f64>>,
    pub vocab: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PlantedSpec {
    pub num_docs: usize,
    pub num_topics: usize,
    /// Words owned by each topic; V = num_topics × words_per_topic.
    pub words_per_topic: usize,
    /// Probability mass a topic puts on its own words.
    pub own_mass: f64,
    /// Symmetric Dirichlet parameter for document-topic mixtures.
    pub doc_alpha: f64,
    pub doc_len: std::ops::RangeInclusive<usize>,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            num_docs: 200,
            num_topics: 3,
            words_per_topic: 10,
            own_mass: 0.9,
            doc_alpha: 0.3,
            doc_len: 40..=60,
            seed: 2012,
        }
    }
}

impl PlantedCorpus {
    /// Topic k owns words `k*W .. (k+1)*W` with geometrically decaying
    /// weights summing to `own_mass`; the remaining mass is spread evenly
    /// over every other word. Each document draws θ ~ Dir(doc_alpha), then
    /// per token a topic from θ and a word from that topic.
    pub fn generate(spec: &PlantedSpec) -> Self {
        let k = spec.num_topics;
        let w = spec.words_per_topic;
        let v = k * w;
        let vocab: Vec<String> = (0..v).map(|i| format!("t{}w{}", i / w, i % w)).collect();

        let decay: Vec<f64> = (0..w).map(|j| 0.85f64.powi(j as i32)).collect();
        let decay_sum: f64 = decay.iter().sum();
        let other = if v > w {
            (1.0 - spec.own_mass) / (v - w) as f64
        } else {
            0.0
        };
        let phi: Vec<Vec<f64>> = (0..k)
            .map(|t| {
                (0..v)
                    .map(|i| {
                        if i / w == t {
                            spec.own_mass * decay[i % w] / decay_sum
                        } else {
                            other
                        }
                    })
                    .collect()
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let gamma = Gamma::new(spec.doc_alpha, 1.0).expect("positive alpha");
        let docs = (0..spec.num_docs)
            .map(|d| {
                let mut theta: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng)).collect();
                let s: f64 = theta.iter().sum();
                if s > 0.0 {
                    theta.iter_mut().for_each(|x| *x /= s);
                } else {
                    theta = vec![1.0 / k as f64; k];
                }
                let len = rng.random_range(spec.doc_len.clone());
                let tokens = (0..len)
                    .map(|_| {
                        let t = draw(&theta, rng.random());
                        vocab[draw(&phi[t], rng.random())].clone()
                    })
                    .collect();
                CleanDocument {
                    id: format!("planted-{d:04}"),
                    tokens,
                }
            })
            .collect();
        Self { docs, phi, vocab }
    }

    /// The `n` most probable generator words of planted topic `k`.
    pub fn top_words(&self, k: usize, n: usize) -> Vec<String> {
        let row = &self.phi[k];
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        idx.into_iter().take(n).map(|i| self.vocab[i].clone()).collect()
    }
}

fn draw(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let target = u * total;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.len() - 1
}

const OBAMA_FORMS: &[&str] = &["Barack Obama", "@BarackObama", "#Obama", "#barackobama", "barack obama"];
const ROMNEY_FORMS: &[&str] = &["Mitt Romney", "@MittRomney", "#Romney", "#mittromney", "mitt romney"];

/// Theme vocabularies: five economic issues followed by noneconomic themes.
const THEMES: &[&[&str]] = &[
    &[
        "economy",
        "markets",
        "growth",
        "recession",
        "recovery",
        "stocks",
        "wallstreet",
        "gdp",
    ],
    &[
        "jobs",
        "unemployment",
        "hiring",
        "workers",
        "wages",
        "employment",
        "layoffs",
        "outsourcing",
    ],
    &[
        "deficit",
        "debt",
        "budget",
        "trillion",
        "spending",
        "borrowing",
        "fiscal",
        "cuts",
    ],
    &[
        "health",
        "healthcare",
        "insurance",
        "obamacare",
        "medicare",
        "care",
        "hospitals",
        "coverage",
    ],
    &[
        "tax",
        "taxes",
        "irs",
        "rates",
        "loopholes",
        "deductions",
        "wealthy",
        "middle",
    ],
    &[
        "debate",
        "moderator",
        "lehrer",
        "denver",
        "stage",
        "performance",
        "answer",
        "zinger",
    ],
    &[
        "libya", "benghazi", "iran", "china", "israel", "embassy", "military", "troops",
    ],
    &[
        "vote",
        "rally",
        "ohio",
        "polls",
        "swing",
        "florida",
        "turnout",
        "volunteers",
    ],
];

const POSITIVE: &[&str] = &[
    "good",
    "great",
    "best",
    "love",
    "proud",
    "strong",
    "success",
    "hope",
    "excellent",
    "support",
];
const NEGATIVE: &[&str] = &[
    "bad", "worse", "worst", "hate", "fail", "wrong", "disaster", "lies", "hurt", "weak",
];
const FILLER: &[&str] = &[
    "the",
    "plan",
    "president",
    "said",
    "today",
    "people",
    "america",
    "country",
    "about",
    "will",
    "his",
    "new",
    "and",
    "for",
    "this",
    "from",
    "campaign",
    "speech",
    "week",
    "american",
];
const HASHTAGS: &[&str] = &["#election2012", "#debate", "#tcot", "#p2", "#forward", "#jobs"];
const MENTIONS: &[&str] = &["@cnn", "@foxnews", "@nytimes", "@politico"];

/// Probability a tweet about (candidate, issue) leans positive, in
/// taxonomy order; index 0 is Obama, 1 Romney.
const POSITIVE_LEAN: [[f64; 5]; 2] = [[0.45, 0.60, 0.55, 0.70, 0.40], [0.42, 0.40, 0.30, 0.55, 0.38]];

/// Generates `n` tweet-like documents with planted candidate mentions,
/// issue vocabulary and sentiment words.
///
/// About 8% of documents mention no candidate and 7% mention both. A
/// document's polarity leans by (candidate, issue); roughly one in six
/// carries no sentiment word or a balanced pair, so it classifies neutral.
pub fn synthetic_tweets(n: usize, seed: u64) -> Vec<RawDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span_secs: u64 = 49 * 86_400;
    (0..n)
        .map(|i| {
            let r: f64 = rng.random();
            let (obama, romney) = match r {
                r if r < 0.45 => (true, false),
                r if r < 0.85 => (false, true),
                r if r < 0.92 => (true, true),
                _ => (false, false),
            };
            let theme = if rng.random_bool(0.8) {
                rng.random_range(0..5)
            } else {
                rng.random_range(5..THEMES.len())
            };
            let lean_row = if obama { 0 } else { 1 };
            let lean = if theme < 5 { POSITIVE_LEAN[lean_row][theme] } else { 0.5 };

            let mut words: Vec<String> = Vec::new();
            for _ in 0..rng.random_range(3..=5) {
                words.push(THEMES[theme].choose(&mut rng).unwrap().to_string());
            }
            for _ in 0..rng.random_range(2..=4) {
                words.push(FILLER.choose(&mut rng).unwrap().to_string());
            }
            let s: f64 = rng.random();
            if s < 0.10 {
                // no sentiment words
            } else if s < 0.17 {
                words.push(POSITIVE.choose(&mut rng).unwrap().to_string());
                words.push(NEGATIVE.choose(&mut rng).unwrap().to_string());
            } else {
                let pool = if rng.random_bool(lean) { POSITIVE } else { NEGATIVE };
                for _ in 0..rng.random_range(1..=2) {
                    words.push(pool.choose(&mut rng).unwrap().to_string());
                }
            }
            shuffle(&mut words, &mut rng);
            if obama {
                let pos = rng.random_range(0..=words.len());
                words.insert(pos, OBAMA_FORMS.choose(&mut rng).unwrap().to_string());
            }
            if romney {
                let pos = rng.random_range(0..=words.len());
                words.insert(pos, ROMNEY_FORMS.choose(&mut rng).unwrap().to_string());
            }
            if rng.random_bool(0.3) {
                words.push(HASHTAGS.choose(&mut rng).unwrap().to_string());
            }
            if rng.random_bool(0.2) {
                words.insert(0, MENTIONS.choose(&mut rng).unwrap().to_string());
            }
            if rng.random_bool(0.25) {
                words.push(format!("http://t.co/{:08x}", rng.random::<u32>()));
            }
            if let Some(first) = words.first_mut() {
                capitalize(first);
            }
            let mut text = words.join(" ");
            if rng.random_bool(0.3) {
                text.push('!');
            }
            let mut doc = RawDocument::new(format!("synth-{i:05}"), text);
            doc.timestamp = Some(timestamp(span_secs * i as u64 / n.max(1) as u64));
            doc
        })
        .collect()
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

fn capitalize(word: &mut String) {
    if let Some(c) = word.chars().next() {
        if c.is_ascii_lowercase() {
            word.replace_range(..1, &c.to_ascii_uppercase().to_string());
        }
    }
}

/// ISO-8601 UTC timestamp `offset` seconds after 2012-09-29T00:00:00Z.
fn timestamp(offset: u64) -> String {
    let mut day = 29 + offset / 86_400;
    let secs = offset % 86_400;
    let mut month = 9;
    for (m, len) in [(9, 30), (10, 31), (11, 30), (12, 31)] {
        if month == m && day > len {
            day -= len;
            month += 1;
        }
    }
    format!(
        "2012-{month:02}-{day:02}T{:02}:{:02}:{:02}Z",
        secs / 3600,
        secs % 3600 / 60,
        secs % 60
    )
}
