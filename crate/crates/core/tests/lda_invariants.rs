use opinion_core::lda::{LdaConfig, LdaState};
use proptest::prelude::*;

fn corpus() -> impl Strategy<Value = (Vec<Vec<u32>>, usize, usize, u64)> {
    (1usize..=50, 2usize..=5, any::<u64>()).prop_flat_map(|(v, k, seed)| {
        let doc = prop::collection::vec(0..v as u32, 1..25);
        (prop::collection::vec(doc, 1..=20), Just(v), Just(k), Just(seed))
    })
}

fn config(k: usize, seed: u64) -> LdaConfig {
    LdaConfig {
        seed,
        ..LdaConfig::with_topics(k)
    }
}

/// Count tables rebuilt by hand from the assignments.
fn hand_counts(s: &LdaState) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
    let (k, v) = (s.num_topics(), s.vocab_size());
    let mut dk = vec![0u32; s.num_docs() * k];
    let mut wk = vec![0u32; v * k];
    let mut nk = vec![0u32; k];
    for d in 0..s.num_docs() {
        for (&w, &z) in s.doc_tokens(d).iter().zip(s.doc_assignments(d)) {
            dk[d * k + z as usize] += 1;
            wk[w as usize * k + z as usize] += 1;
            nk[z as usize] += 1;
        }
    }
    (dk, wk, nk)
}

fn assert_counts(s: &LdaState) -> Result<(), TestCaseError> {
    let (dk, wk, nk) = hand_counts(s);
    let stored = s.stored_counts();
    prop_assert_eq!(&stored.doc_topic, &dk);
    prop_assert_eq!(&stored.word_topic, &wk);
    prop_assert_eq!(&stored.topic_totals, &nk);
    prop_assert_eq!(s.recount(), stored);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn counts_consistent_after_every_sweep((docs, v, k, seed) in corpus()) {
        let cfg = config(k, seed);
        let mut s = LdaState::init(&docs, v, &cfg);
        assert_counts(&s)?;
        let lens: Vec<usize> = (0..s.num_docs()).map(|d| s.doc_len(d)).collect();
        let total = s.num_tokens();
        for _ in 0..5 {
            s.sweep(cfg.alpha, cfg.beta);
            assert_counts(&s)?;
            prop_assert_eq!(s.num_tokens(), total);
            let now: Vec<usize> = (0..s.num_docs()).map(|d| s.doc_len(d)).collect();
            prop_assert_eq!(&now, &lens);
            let nk: u32 = (0..k).map(|t| s.topic_total(t)).sum();
            prop_assert_eq!(nk as usize, total);
            prop_assert!(s.assignments().iter().all(|&z| (z as usize) < k));
        }
    }

    #[test]
    fn phi_and_theta_rows_normalized((docs, v, k, seed) in corpus()) {
        let cfg = config(k, seed);
        let mut s = LdaState::init(&docs, v, &cfg);
        s.sweep(cfg.alpha, cfg.beta);
        for row in s.phi(cfg.beta).iter().chain(s.theta(cfg.alpha).iter()) {
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "row sums to {}", sum);
            prop_assert!(row.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn fixed_seed_is_bit_deterministic((docs, v, k, seed) in corpus()) {
        let cfg = config(k, seed);
        let run = || {
            let mut s = LdaState::init(&docs, v, &cfg);
            for _ in 0..5 {
                s.sweep(cfg.alpha, cfg.beta);
            }
            (s.assignments().to_vec(), s.log_likelihood(cfg.alpha, cfg.beta).to_bits())
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn likelihood_invariant_under_topic_relabeling((docs, v, k, seed) in corpus(), rot in 1usize..5) {
        let cfg = config(k, seed);
        let mut s = LdaState::init(&docs, v, &cfg);
        s.sweep(cfg.alpha, cfg.beta);
        let before = s.log_likelihood(cfg.alpha, cfg.beta);
        let perm: Vec<usize> = (0..k).map(|t| (t + rot) % k).collect();
        s.permute_topics(&perm);
        assert_counts(&s)?;
        let after = s.log_likelihood(cfg.alpha, cfg.beta);
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0), "{} vs {}", before, after);
    }
}
