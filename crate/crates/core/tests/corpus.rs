mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eoqa::app::{category_name, evaluate_corpus, load_corpus, parse_corpus, AskOptions, CorpusEntry, MatchMode};
use eoqa::sparql::{parse, serialize};

use common::{corpus_path, engine};

fn corpus() -> Vec<CorpusEntry> {
    load_corpus(&corpus_path()).unwrap()
}

#[test]
fn corpus_covers_nine_categories() {
    let entries = corpus();
    assert!(entries.len() >= 60, "{}", entries.len());
    let cats: BTreeSet<&str> = entries.iter().map(|e| e.category.as_str()).collect();
    assert_eq!(cats.len(), 9);
    for c in &cats {
        assert!(category_name(c).is_some(), "{c}");
        assert!(entries.iter().filter(|e| &e.category == c).count() >= 5);
    }
}

#[test]
fn frozen_answers_match_their_gold_queries() {
    let e = engine();
    let mut checked = 0;
    for entry in corpus() {
        if let (Some(q), Some(gold)) = (&entry.gold_query, &entry.gold_answers) {
            let got = e.execute(&parse(q).unwrap()).unwrap();
            assert!(got.same_answers(gold), "{}", entry.id);
            checked += 1;
        }
    }
    assert!(checked >= 60);
}

#[test]
fn gold_queries_are_canonical() {
    for entry in corpus() {
        if let Some(q) = &entry.gold_query {
            let parsed = parse(q).unwrap();
            assert_eq!(parse(&serialize(&parsed)).unwrap(), parsed, "{}", entry.id);
        }
    }
}

#[test]
fn accuracy_is_at_least_ninety_percent() {
    let entries = corpus();
    let t = Instant::now();
    let report = evaluate_corpus(engine(), &entries).unwrap();
    assert!(t.elapsed().as_secs_f64() < 30.0);
    assert_eq!(report.overall.total, entries.len());
    assert!(report.overall.accuracy >= 0.9, "{}", report.to_table());
    let table = report.to_table();
    for f in report.failures() {
        assert!(table.contains(&f.id));
        assert!(f.trace.is_some() || f.error.is_some(), "{} has no trace", f.id);
        if f.mode == MatchMode::Answers && f.error.is_none() {
            assert!(!f.missing.is_empty() || !f.unexpected.is_empty(), "{}", f.id);
        }
    }
}

#[test]
fn report_ignores_corpus_order() {
    let mut entries = corpus();
    let a = evaluate_corpus(engine(), &entries).unwrap();
    entries.shuffle(&mut ChaCha8Rng::seed_from_u64(11));
    let b = evaluate_corpus(engine(), &entries).unwrap();
    assert_eq!(a.to_json().to_string(), b.to_json().to_string());
}

#[test]
fn two_runs_are_byte_identical() {
    let entries = corpus();
    let e = engine();
    let run = || {
        let report = serde_json::to_string_pretty(&evaluate_corpus(e, &entries).unwrap().to_json()).unwrap();
        let traces: Vec<String> = entries
            .iter()
            .map(|x| {
                let r = e.ask(&x.question, AskOptions { execute: true, trace: true }).unwrap();
                serde_json::to_string(&(r.trace, r.answers, r.return_types)).unwrap()
            })
            .collect();
        (report, traces)
    };
    assert_eq!(run(), run());
}

#[test]
fn rewriting_preserves_answers_on_corpus() {
    let e = engine();
    let mut rewritten = 0;
    for entry in corpus() {
        let Ok((_, q, _, _)) = e.translate(&entry.question) else { continue };
        let rw = e.rewrite(&q);
        if rw != q {
            rewritten += 1;
            let plain = e.execute(&q).unwrap();
            let fast = e.execute_materialized(&rw).unwrap();
            assert!(plain.same_answers(&fast), "{}: {}", entry.id, serialize(&rw));
        }
        if let Some(g) = &entry.gold_query {
            let gq = parse(g).unwrap();
            let grw = e.rewrite(&gq);
            assert!(e.execute(&gq).unwrap().same_answers(&e.execute_materialized(&grw).unwrap()), "{}", entry.id);
        }
    }
    assert!(rewritten >= 20, "{rewritten}");
}

#[test]
fn round_trips_through_json_lines() {
    let entries = corpus();
    let text: String = entries.iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect();
    assert_eq!(parse_corpus(&text).unwrap(), entries);
}
