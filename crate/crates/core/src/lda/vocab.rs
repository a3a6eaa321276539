use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::LdaError;
use crate::corpus::CleanDocument;

/// Dense word ↔ index mapping. Indices follow first occurrence in the corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct VocabMap {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl VocabMap {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: u32) -> &str {
        &self.words[idx as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    fn push(&mut self, word: &str) -> u32 {
        if let Some(i) = self.get(word) {
            return i;
        }
        let i = self.words.len() as u32;
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), i);
        i
    }
}

impl From<Vec<String>> for VocabMap {
    fn from(words: Vec<String>) -> Self {
        let mut v = VocabMap::default();
        for w in &words {
            v.push(w);
        }
        v
    }
}

impl From<VocabMap> for Vec<String> {
    fn from(v: VocabMap) -> Self {
        v.words
    }
}

/// Documents re-expressed as vocabulary indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexedCorpus {
    pub doc_ids: Vec<String>,
    pub docs: Vec<Vec<u32>>,
    /// Documents that had no in-vocabulary token left.
    pub dropped_docs: usize,
}

impl IndexedCorpus {
    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }
}

/// Keeps words whose corpus frequency is at least `min_word_count`.
pub fn build_vocab(docs: &[CleanDocument], min_word_count: usize) -> Result<(VocabMap, IndexedCorpus), LdaError> {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        for t in &doc.tokens {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut vocab = VocabMap::default();
    let mut corpus = IndexedCorpus::default();
    for doc in docs {
        let ids: Vec<u32> = doc
            .tokens
            .iter()
            .filter(|t| freq[t.as_str()] >= min_word_count)
            .map(|t| vocab.push(t))
            .collect();
        if ids.is_empty() {
            corpus.dropped_docs += 1;
        } else {
            corpus.doc_ids.push(doc.id.clone());
            corpus.docs.push(ids);
        }
    }
    if vocab.is_empty() {
        return Err(LdaError::EmptyVocabulary);
    }
    Ok((vocab, corpus))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, toks: &[&str]) -> CleanDocument {
        CleanDocument {
            id: id.into(),
            tokens: toks.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn floor_examples() {
        let docs = vec![doc("a", &["tax", "tax", "plan"])];
        let (v, c) = build_vocab(&docs, 1).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(c.docs, vec![vec![0, 0, 1]]);

        let (v, c) = build_vocab(&docs, 2).unwrap();
        assert_eq!(v.words(), &["tax".to_string()]);
        assert_eq!(c.docs, vec![vec![0, 0]]);

        assert!(matches!(build_vocab(&docs, 3), Err(LdaError::EmptyVocabulary)));
        assert!(matches!(build_vocab(&[], 1), Err(LdaError::EmptyVocabulary)));
    }

    #[test]
    fn emptied_docs_are_dropped() {
        let docs = vec![doc("a", &["tax", "tax"]), doc("b", &["rare"])];
        let (_, c) = build_vocab(&docs, 2).unwrap();
        assert_eq!(c.doc_ids, vec!["a"]);
        assert_eq!(c.dropped_docs, 1);
    }

    #[test]
    fn bijective() {
        let docs = vec![doc("a", &["x", "y", "x", "z"])];
        let (v, _) = build_vocab(&docs, 1).unwrap();
        for (i, w) in v.words().iter().enumerate() {
            assert_eq!(v.get(w), Some(i as u32));
        }
        let json = serde_json::to_string(&v).unwrap();
        let back: VocabMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
