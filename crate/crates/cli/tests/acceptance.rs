//! One PASS/FAIL line per acceptance criterion; exits nonzero when any of
//! criteria 1-9 fails. Run with `cargo test -p opinion-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use opinion_cli::bench;
use opinion_core::dpnt::{compare_with_survey, issue_salience_rank, Advantage, DpntTable, SurveyTable};
use opinion_core::issues::{assign_issue, Issue, IssueLexicon};
use opinion_core::lda::{train, LdaConfig, LdaState};
use opinion_core::lexicon::Pattern;
use opinion_core::sentiment::{Label, SentimentLexicon};
use opinion_core::synthetic::{PlantedCorpus, PlantedSpec};
use opinion_core::TopicSummary;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

// Pinned limits.
const GOLDEN_LIMIT: Duration = Duration::from_secs(1);
const SENTIMENT_LIMIT: Duration = Duration::from_secs(10);
const LDA_INVARIANT_LIMIT: Duration = Duration::from_secs(30);
const RECOVERY_LIMIT: Duration = Duration::from_secs(120);
const PIPELINE_LIMIT: Duration = Duration::from_secs(120);
const PROPERTY_CASES: u32 = 1000;
const NORMALIZATION_TOL: f64 = 1e-9;
const MIN_RECOVERED: usize = 7;
const SENTIMENT_FLOOR: f64 = 50_000.0;
const GIBBS_FLOOR: f64 = 1_000_000.0;

const OBAMA_ROW: [(u32, u32); 5] = [(13, 18), (34, 24), (4, 3), (11, 4), (8, 13)];
const ROMNEY_ROW: [(u32, u32); 5] = [(19, 25), (22, 31), (3, 9), (18, 14), (21, 31)];

fn table() -> DpntTable {
    DpntTable::new(["obama", "romney"])
        .with_row("obama", OBAMA_ROW)
        .with_row("romney", ROMNEY_ROW)
}

type Criterion = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!(
        "{} ({:.2}s, limit {}s)",
        out.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    out.pass &= took < limit;
    out
}

fn dpnt_rows() -> Outcome {
    let t = table();
    let row = |c: &str| -> Vec<i64> { Issue::ALL.iter().map(|&i| t.score(c, i).unwrap().value).collect() };
    let (o, r) = (row("obama"), row("romney"));
    check(
        o == [-5, 10, 1, 7, -5] && r == [-6, -9, -6, 4, -10],
        format!("obama {o:?}, romney {r:?}"),
    )
}

fn advantage_and_agreement() -> Outcome {
    let adv = table().advantage_table().unwrap();
    let all_obama = Issue::ALL
        .iter()
        .all(|i| adv.winners[i] == Advantage::Candidate("obama".into()));
    let cmp = compare_with_survey(&adv, &SurveyTable::pew_september_2012()).unwrap();
    check(
        all_obama && cmp.agreeing == 4 && cmp.agreement == 0.8,
        format!(
            "obama advantaged on all five: {all_obama}, agreement {} ({}/5)",
            cmp.agreement, cmp.agreeing
        ),
    )
}

fn salience() -> Outcome {
    use Issue::*;
    let totals = |row: [(u32, u32); 5]| row.map(|(p, n)| p + n);
    let order = |row| {
        issue_salience_rank(totals(row))
            .into_iter()
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
    };
    let (o, r) = (order(OBAMA_ROW), order(ROMNEY_ROW));
    check(
        o == [Job, EconomyInGeneral, Tax, Healthcare, BudgetDeficit]
            && r == [Job, Tax, EconomyInGeneral, Healthcare, BudgetDeficit],
        format!("obama {o:?}, romney {r:?}"),
    )
}

fn total_sign() -> Outcome {
    // hand sums: obama 70 positive vs 62 negative, romney 83 vs 110
    let t = table();
    let (o, r) = (t.total_dpnt("obama").unwrap(), t.total_dpnt("romney").unwrap());
    check(
        o == 70 - 62 && r == 83 - 110 && o > 0 && r < 0,
        format!("obama {o:+}, romney {r:+}"),
    )
}

fn brute(entries: &[(String, bool)], tok: &str) -> bool {
    entries
        .iter()
        .any(|(w, prefix)| if *prefix { tok.starts_with(w.as_str()) } else { tok == w })
}

fn brute_label(p: usize, n: usize) -> Label {
    match p.cmp(&n) {
        std::cmp::Ordering::Greater => Label::Positive,
        std::cmp::Ordering::Less => Label::Negative,
        std::cmp::Ordering::Equal => Label::Neutral,
    }
}

fn sentiment_suite() -> Outcome {
    let entries = || prop::collection::vec(("[abc]{2,4}", any::<bool>()), 0..6);
    let strategy = (
        entries(),
        entries(),
        prop::collection::vec("[abc]{1,6}", 0..30),
        any::<u64>(),
    );
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let cases = std::cell::Cell::new(0u32);
    let result = runner.run(&strategy, |(pos, mut neg, toks, seed)| {
        cases.set(cases.get() + 1);
        neg.retain(|e| !pos.contains(e));
        let pat = |(w, p): &(String, bool)| {
            if *p {
                Pattern::Prefix(w.clone())
            } else {
                Pattern::Literal(w.clone())
            }
        };
        let lex = SentimentLexicon::new(pos.iter().map(pat), neg.iter().map(pat)).unwrap();
        let p = toks.iter().filter(|t| brute(&pos, t)).count();
        let n = toks.iter().filter(|t| brute(&neg, t)).count();
        let r = lex.classify(&toks);
        // occurrence counting, wildcard matching and the majority rule
        prop_assert_eq!((r.pos_count, r.neg_count, r.label), (p, n, brute_label(p, n)));
        // polarity swap
        let s = lex.swapped().classify(&toks);
        prop_assert_eq!((s.pos_count, s.neg_count, s.label), (n, p, brute_label(n, p)));
        // permutation invariance
        let mut shuffled = toks.clone();
        let mut x = seed;
        for i in (1..shuffled.len()).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, ((x >> 33) as usize) % (i + 1));
        }
        prop_assert_eq!(lex.classify(&shuffled), r);
        // duplication doubles counts, keeps label
        let doubled: Vec<String> = toks.iter().chain(&toks).cloned().collect();
        let d = lex.classify(&doubled);
        prop_assert_eq!((d.pos_count, d.neg_count, d.label), (2 * p, 2 * n, r.label));
        Ok(())
    });
    match result {
        Ok(()) => check(
            cases.get() >= PROPERTY_CASES,
            format!("{} randomized cases, 0 failures", cases.get()),
        ),
        Err(e) => check(false, format!("failure: {e}")),
    }
}

fn lda_invariants() -> Outcome {
    let strategy = (1usize..=50, 2usize..=5, any::<u64>()).prop_flat_map(|(v, k, seed)| {
        let doc = prop::collection::vec(0..v as u32, 1..25);
        (prop::collection::vec(doc, 1..=20), Just(v), Just(k), Just(seed))
    });
    let mut runner = TestRunner::new(Config {
        cases: 300,
        failure_persistence: None,
        ..Config::default()
    });
    let sweeps = std::cell::Cell::new(0usize);
    let result = runner.run(&strategy, |(docs, v, k, seed)| {
        let cfg = LdaConfig {
            seed,
            ..LdaConfig::with_topics(k)
        };
        let run = || {
            let mut s = LdaState::init(&docs, v, &cfg);
            let mut ok = s.recount() == s.stored_counts();
            for _ in 0..10 {
                s.sweep(cfg.alpha, cfg.beta);
                ok &= s.recount() == s.stored_counts();
            }
            (s, ok)
        };
        let (a, ok) = run();
        sweeps.set(sweeps.get() + 10);
        prop_assert!(ok, "count tables diverged from assignments");
        for row in a.phi(cfg.beta).iter().chain(a.theta(cfg.alpha).iter()) {
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= NORMALIZATION_TOL, "row sum {}", sum);
        }
        let (b, _) = run();
        prop_assert_eq!(a.assignments(), b.assignments());
        prop_assert_eq!(
            a.log_likelihood(cfg.alpha, cfg.beta).to_bits(),
            b.log_likelihood(cfg.alpha, cfg.beta).to_bits()
        );
        Ok(())
    });
    match result {
        Ok(()) => check(
            true,
            format!("300 corpora, {} checked sweeps, deterministic", sweeps.get()),
        ),
        Err(e) => check(false, format!("failure: {e}")),
    }
}

fn lda_recovery() -> Outcome {
    let corpus = PlantedCorpus::generate(&PlantedSpec::default());
    let cfg = LdaConfig {
        seed: 42,
        trace_interval: 1,
        ..LdaConfig::with_topics(3)
    };
    let model = train(&corpus.docs, &cfg).unwrap();
    let learned: Vec<Vec<String>> = (0..3)
        .map(|k| model.top_words(k, 10).words.into_iter().map(|(w, _)| w).collect())
        .collect();
    // greedy matching on overlap
    let mut pairs = Vec::new();
    for (i, l) in learned.iter().enumerate() {
        for j in 0..3 {
            let overlap = corpus.top_words(j, 10).iter().filter(|w| l.contains(w)).count();
            pairs.push((overlap, i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let (mut used, mut got) = (vec![false; 3], vec![None; 3]);
    for (o, i, j) in pairs {
        if got[j].is_none() && !used[i] {
            used[i] = true;
            got[j] = Some(o);
        }
    }
    let got: Vec<usize> = got.into_iter().map(Option::unwrap).collect();
    let initial = model.trace[0].log_likelihood;
    let tail = &model.trace[model.trace.len() - cfg.iterations / 10..];
    let mean = tail.iter().map(|t| t.log_likelihood).sum::<f64>() / tail.len() as f64;
    check(
        got.iter().all(|&o| o >= MIN_RECOVERED) && mean > initial,
        format!("recovered {got:?} of 10 per topic; final mean loglik {mean:.1} vs initial {initial:.1}"),
    )
}

fn issue_mapping() -> Outcome {
    use Issue::*;
    let lex = IssueLexicon::builtin();
    let columns = [EconomyInGeneral, Job, BudgetDeficit, Healthcare, Tax];
    let obama = [
        "good economy markets grows succeed",
        "jobs created millions private sector",
        "debt trillion deficit national added",
        "care health obamacare insurance affordable",
        "tax plan raise rich wealthy",
    ];
    let romney = [
        "romney bad economy idea policies",
        "romney hurt thousands families business",
        "deficit gov debt left budget",
        "health insurance american people americans",
        "tax plan companies worse make",
    ];
    let mut wrong = Vec::new();
    for (words, expected) in obama.iter().chain(&romney).zip(columns.iter().cycle()) {
        let topic = TopicSummary {
            topic: 0,
            words: words
                .split(' ')
                .enumerate()
                .map(|(r, w)| (w.to_string(), 0.1 / (r + 1) as f64))
                .collect(),
        };
        let got = assign_issue(&topic, &lex, 10).issue;
        if got != Some(*expected) {
            wrong.push(format!("`{words}` -> {got:?}"));
        }
    }
    check(
        wrong.is_empty(),
        if wrong.is_empty() {
            "10 of 10 sample topics map to their column issue".to_string()
        } else {
            wrong.join("; ")
        },
    )
}

fn end_to_end() -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let conf = fixtures.join("pipeline.conf");
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_opinion"))
            .args(["pipeline", "run", "--config"])
            .arg(&conf)
            .arg("--out-dir")
            .arg(&out)
            .args(["--seed", "42", "--format", "md,json,csv"])
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        (status.status.success(), out)
    };
    let (ok_a, a) = run("a");
    let (ok_b, b) = run("b");
    if !(ok_a && ok_b) {
        return check(false, "pipeline run failed");
    }
    let identical = ["report.md", "report.json", "report.csv"]
        .iter()
        .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    let consistent = report["sentiment"].as_array().unwrap().iter().all(|s| {
        let n = |k: &str| s[k].as_u64().unwrap();
        n("positive") + n("negative") + n("neutral") == n("matched")
    });
    check(
        identical && consistent,
        format!("byte-identical reports: {identical}; pos+neg+neutral = matched: {consistent}"),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("1 DPNT golden rows", || timed(GOLDEN_LIMIT, dpnt_rows)),
        ("2 advantage and survey agreement", || {
            timed(GOLDEN_LIMIT, advantage_and_agreement)
        }),
        ("3 salience ordering", || timed(GOLDEN_LIMIT, salience)),
        ("4 total DPNT signs", || timed(GOLDEN_LIMIT, total_sign)),
        ("5 sentiment property suite", || timed(SENTIMENT_LIMIT, sentiment_suite)),
        ("6 LDA invariant suite", || timed(LDA_INVARIANT_LIMIT, lda_invariants)),
        ("7 LDA planted recovery", || timed(RECOVERY_LIMIT, lda_recovery)),
        ("8 issue assignment of sample topics", issue_mapping),
        ("9 end-to-end determinism", || timed(PIPELINE_LIMIT, end_to_end)),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let out = f();
        println!("[{}] {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        if !out.pass {
            failed.push(name);
        }
    }

    let profile = if cfg!(debug_assertions) { "dev" } else { "release" };
    let r = bench::run(5000, 20, 10, 42);
    let fast = r.sentiment_docs_per_sec >= SENTIMENT_FLOOR && r.gibbs_token_updates_per_sec >= GIBBS_FLOOR;
    println!(
        "[{}] 10 throughput (reported, not asserted; {profile} profile): sentiment {:.0} docs/s, gibbs {:.0} token-updates/s",
        if fast { "PASS" } else { "FAIL" },
        r.sentiment_docs_per_sec,
        r.gibbs_token_updates_per_sec
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
