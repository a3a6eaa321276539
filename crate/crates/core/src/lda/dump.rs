//! Model dumps: JSON for small runs, a flat little-endian table format for
//! large ones, and a CSV export of top words.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! [u8; 4]   magic "LDAT"
//! u32       format version (1)
//! u32 + ..  partition name: byte length, UTF-8 bytes
//! u32       K (topics)
//! u32       V (vocabulary size)
//! f64       alpha
//! f64       beta
//! u64       iterations
//! u64       seed
//! u64       min_word_count
//! u64       trace_interval
//! V ×       (u32 byte length, UTF-8 bytes)    words in index order
//! K × V     u32 topic-word counts, topic-major
//! u32       N (top words per topic)
//! K × N ×   (u32 word index, f64 probability)
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::{LdaConfig, LdaError, TopicSummary, TrainedModel};

pub const BINARY_MAGIC: [u8; 4] = *b"LDAT";
pub const BINARY_VERSION: u32 = 1;

/// Header written by [`ModelDump::write_top_words_csv`].
pub const TOP_WORDS_CSV_HEADER: &str = "topic,rank,word,probability";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub partition: String,
    pub config: LdaConfig,
    pub vocab: Vec<String>,
    /// K × V counts, topic-major.
    pub topic_word: Vec<Vec<u32>>,
    pub topics: Vec<TopicSummary>,
}

impl ModelDump {
    pub fn from_model(partition: impl Into<String>, model: &TrainedModel, top_n: usize) -> Self {
        Self {
            partition: partition.into(),
            config: model.config.clone(),
            vocab: model.vocab.words().to_vec(),
            topic_word: model.state.topic_word_table(),
            topics: model.summaries(top_n),
        }
    }

    pub fn to_json(&self) -> Result<String, LdaError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, LdaError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), LdaError> {
        let k = self.topic_word.len();
        let v = self.vocab.len();
        let n = self.topics.first().map_or(0, |t| t.words.len());
        if self.topics.len() != k || self.topics.iter().any(|t| t.words.len() != n) {
            return Err(LdaError::BadDump("ragged topic summaries".into()));
        }
        w.write_all(&BINARY_MAGIC)?;
        w.write_u32::<LE>(BINARY_VERSION)?;
        write_str(&mut w, &self.partition)?;
        w.write_u32::<LE>(k as u32)?;
        w.write_u32::<LE>(v as u32)?;
        let c = &self.config;
        w.write_f64::<LE>(c.alpha)?;
        w.write_f64::<LE>(c.beta)?;
        w.write_u64::<LE>(c.iterations as u64)?;
        w.write_u64::<LE>(c.seed)?;
        w.write_u64::<LE>(c.min_word_count as u64)?;
        w.write_u64::<LE>(c.trace_interval as u64)?;
        for word in &self.vocab {
            write_str(&mut w, word)?;
        }
        for row in &self.topic_word {
            if row.len() != v {
                return Err(LdaError::BadDump(
                    "topic-word row length differs from vocabulary".into(),
                ));
            }
            for &count in row {
                w.write_u32::<LE>(count)?;
            }
        }
        w.write_u32::<LE>(n as u32)?;
        for topic in &self.topics {
            for (word, p) in &topic.words {
                let idx = self
                    .vocab
                    .iter()
                    .position(|x| x == word)
                    .ok_or_else(|| LdaError::BadDump(format!("top word `{word}` not in vocabulary")))?;
                w.write_u32::<LE>(idx as u32)?;
                w.write_f64::<LE>(*p)?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, LdaError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != BINARY_MAGIC {
            return Err(LdaError::BadDump("bad magic".into()));
        }
        let version = r.read_u32::<LE>()?;
        if version != BINARY_VERSION {
            return Err(LdaError::BadDump(format!("unsupported version {version}")));
        }
        let partition = read_str(&mut r)?;
        let k = r.read_u32::<LE>()? as usize;
        let v = r.read_u32::<LE>()? as usize;
        let config = LdaConfig {
            num_topics: k,
            alpha: r.read_f64::<LE>()?,
            beta: r.read_f64::<LE>()?,
            iterations: r.read_u64::<LE>()? as usize,
            seed: r.read_u64::<LE>()?,
            min_word_count: r.read_u64::<LE>()? as usize,
            trace_interval: r.read_u64::<LE>()? as usize,
        };
        let vocab = (0..v).map(|_| read_str(&mut r)).collect::<Result<Vec<_>, _>>()?;
        let mut topic_word = Vec::with_capacity(k);
        for _ in 0..k {
            let mut row = vec![0u32; v];
            r.read_u32_into::<LE>(&mut row)?;
            topic_word.push(row);
        }
        let n = r.read_u32::<LE>()? as usize;
        let mut topics = Vec::with_capacity(k);
        for topic in 0..k {
            let mut words = Vec::with_capacity(n);
            for _ in 0..n {
                let idx = r.read_u32::<LE>()? as usize;
                let p = r.read_f64::<LE>()?;
                let word = vocab
                    .get(idx)
                    .ok_or_else(|| LdaError::BadDump(format!("word index {idx} out of range")))?;
                words.push((word.clone(), p));
            }
            topics.push(TopicSummary { topic, words });
        }
        Ok(Self {
            partition,
            config,
            vocab,
            topic_word,
            topics,
        })
    }

    /// `topic,rank,word,probability` rows, rank starting at 1.
    pub fn write_top_words_csv<W: Write>(&self, w: W) -> Result<(), LdaError> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| LdaError::Io(std::io::Error::other(e));
        out.write_record(TOP_WORDS_CSV_HEADER.split(',')).map_err(io)?;
        for topic in &self.topics {
            for (rank, (word, p)) in topic.words.iter().enumerate() {
                out.write_record([
                    topic.topic.to_string(),
                    (rank + 1).to_string(),
                    word.clone(),
                    p.to_string(),
                ])
                .map_err(io)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    w.write_u32::<LE>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_str<R: Read>(r: &mut R) -> Result<String, LdaError> {
    let len = r.read_u32::<LE>()? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| LdaError::BadDump("invalid UTF-8 string".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CleanDocument;
    use crate::lda::train;

    fn model() -> TrainedModel {
        let docs: Vec<CleanDocument> = [
            ["tax", "plan", "rich"],
            ["jobs", "created", "sector"],
            ["tax", "jobs", "debt"],
        ]
        .iter()
        .enumerate()
        .map(|(i, t)| CleanDocument {
            id: i.to_string(),
            tokens: t.iter().map(|s| s.to_string()).collect(),
        })
        .collect();
        let config = LdaConfig {
            iterations: 10,
            ..LdaConfig::with_topics(2)
        };
        train(&docs, &config).unwrap()
    }

    #[test]
    fn binary_and_json_agree() {
        let dump = ModelDump::from_model("obama_positive", &model(), 3);
        let mut bytes = Vec::new();
        dump.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"LDAT");
        assert_eq!(ModelDump::read_binary(bytes.as_slice()).unwrap(), dump);
        assert_eq!(ModelDump::from_json(&dump.to_json().unwrap()).unwrap(), dump);
    }

    #[test]
    fn binary_rejects_garbage() {
        assert!(matches!(
            ModelDump::read_binary(&b"NOPE\x01\0\0\0"[..]),
            Err(LdaError::BadDump(_))
        ));
        assert!(matches!(ModelDump::read_binary(&b"LDAT"[..]), Err(LdaError::Io(_))));
    }

    #[test]
    fn csv_layout() {
        let dump = ModelDump::from_model("p", &model(), 2);
        let mut out = Vec::new();
        dump.write_top_words_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "topic,rank,word,probability");
        assert_eq!(lines.len(), 1 + 2 * 2);
        assert!(lines[1].starts_with("0,1,"));
        assert!(lines[2].starts_with("0,2,"));
    }
}
