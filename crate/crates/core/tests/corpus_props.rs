use std::collections::BTreeSet;

use opinion_core::corpus::{
    builtin_queries, match_candidates, partition_corpus, remove_stopwords, tokenize, CleanDocument, LabeledDocument,
    Stoplist,
};
use opinion_core::sentiment::Label;
use proptest::prelude::*;

fn tweetish() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "[a-zA-Z]{1,8}",
        "[0-9]{1,4}",
        Just("Barack Obama".to_string()),
        Just("@MittRomney".to_string()),
        Just("#obama".to_string()),
        Just("http://t.co/xyz".to_string()),
        Just("romney's".to_string()),
        "[!?.,;:'\"()]{1,3}",
    ];
    prop::collection::vec(piece, 0..15).prop_map(|v| v.join(" "))
}

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::Positive), Just(Label::Negative), Just(Label::Neutral)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn tokenize_is_idempotent(text in tweetish()) {
        let once = tokenize(&text);
        prop_assert_eq!(tokenize(&once.join(" ")), once);
    }

    #[test]
    fn tokens_are_clean(text in tweetish()) {
        for t in tokenize(&text) {
            prop_assert!(t.chars().count() >= 2);
            prop_assert!(!t.chars().all(|c| c.is_ascii_digit()));
            prop_assert_eq!(t.to_lowercase(), t.clone());
            prop_assert!(!t.starts_with('@') && !t.starts_with("http"));
        }
    }

    #[test]
    fn stopword_removal_is_idempotent(text in tweetish()) {
        let stop = Stoplist::english();
        let once = remove_stopwords(&tokenize(&text), &stop);
        prop_assert_eq!(remove_stopwords(&once, &stop), once);
    }

    #[test]
    fn candidate_matching_ignores_case(text in tweetish()) {
        let q = builtin_queries();
        let base = match_candidates(&text, &q);
        prop_assert_eq!(match_candidates(&text.to_uppercase(), &q), base.clone());
        prop_assert_eq!(match_candidates(&text.to_lowercase(), &q), base);
    }

    #[test]
    fn partition_sizes_sum_to_tags(
        docs in prop::collection::vec(
            (prop::collection::vec("[a-z]{2,5}", 0..4), prop::sample::subsequence(vec!["obama", "romney"], 0..=2), label()),
            0..40,
        )
    ) {
        let labeled: Vec<LabeledDocument> = docs
            .iter()
            .enumerate()
            .map(|(i, (tokens, cands, label))| LabeledDocument {
                doc: CleanDocument { id: i.to_string(), tokens: tokens.clone() },
                candidates: cands.iter().map(|c| c.to_string()).collect::<BTreeSet<_>>(),
                label: *label,
            })
            .collect();
        let cands = vec!["obama".to_string(), "romney".to_string()];
        let p = partition_corpus(&labeled, &cands);
        prop_assert_eq!(p.partitions.len(), 4);
        let total: usize = p.partitions.iter().map(|x| x.documents.len()).sum();
        let expected: usize = labeled
            .iter()
            .filter(|d| d.label != Label::Neutral && !d.doc.tokens.is_empty())
            .map(|d| d.candidates.len())
            .sum();
        prop_assert_eq!(total, expected);
    }
}
