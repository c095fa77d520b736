//! Corpus-level checks against independent recounts of generated data.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use trendsim_core::clean::HashtagMode;
use trendsim_core::embed::{
    load_lexicon, CachedBackend, EmbedBackend, EmbeddingVector, Lexicon, LexiconBackend,
};
use trendsim_core::ingest::{
    ingest_corpus, partition_by_day, DateRange, DayKey, IngestOptions, SkipReason,
};
use trendsim_core::lexical::{top_n_with_counts, DayCorpus, FrequencyTable, Stopwords, Token};
use trendsim_core::scoring::{
    embed_targets, score_run, ScoreParams, ScoringMethod, SentenceMethod, TargetSpec,
};
use trendsim_core::synth::{generate_corpus, generate_lexicon, SynthSpec};

fn spec(days: u32, per_day: u32) -> SynthSpec {
    let d = SynthSpec::default();
    SynthSpec {
        days,
        tweets_per_day: per_day,
        spike: d.spike.clone().filter(|sp| sp.to_day <= days),
        ..d
    }
}

fn opts(spec: &SynthSpec) -> IngestOptions {
    IngestOptions {
        range: spec.range(),
        lang: "en".into(),
        exclude_retweets: false,
    }
}

fn write_corpus(dir: &tempfile::TempDir, spec: &SynthSpec) -> (std::path::PathBuf, String) {
    let lex = generate_lexicon(spec).unwrap();
    let text = generate_corpus(spec, &lex).unwrap();
    let path = dir.path().join("corpus.jsonl");
    fs::write(&path, &text).unwrap();
    (path, text)
}

/// Whitespace tokens left after dropping the generator's decorations.
fn oracle_words(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .filter(|w| !(w.starts_with('@') || w.starts_with('#') || w.starts_with("https://")))
        .filter(|w| *w != "\u{1F642}")
        .collect()
}

fn oracle_tokens(text: &str, stop: &Stopwords) -> Vec<String> {
    oracle_words(text)
        .iter()
        .map(|w| w.trim_end_matches(['.', '!', '?']).to_lowercase())
        .filter(|w| w.len() >= 2 && !stop.contains(w))
        .collect()
}

fn oracle_sentences(text: &str) -> usize {
    oracle_words(text)
        .join(" ")
        .split(['.', '!', '?'])
        .filter(|s| s.trim().chars().count() >= 3)
        .count()
}

fn texts_by_day(jsonl: &str) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for line in jsonl.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let day = v["created_at"].as_str().unwrap()[..10].to_string();
        out.entry(day)
            .or_default()
            .push(v["text"].as_str().unwrap().to_string());
    }
    out
}

#[test]
fn bad_timestamps_are_skipped_as_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(5, 200);
    let (path, text) = write_corpus(&dir, &s);
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    assert_eq!(lines.len(), 1000);
    for i in (0..1000).step_by(100) {
        let mut v: Value = serde_json::from_str(&lines[i]).unwrap();
        v["created_at"] = Value::from("2020-07-0? 25:61");
        lines[i] = v.to_string();
    }
    fs::write(&path, lines.join("\n") + "\n").unwrap();

    let bad = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .filter(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            chrono::DateTime::parse_from_rfc3339(v["created_at"].as_str().unwrap()).is_err()
        })
        .count();
    assert_eq!(bad, 10);

    let (records, summary) = ingest_corpus(&[path], &opts(&s)).unwrap();
    assert_eq!(records.len(), 990);
    assert_eq!(summary.accepted, 990);
    assert_eq!(summary.skipped(SkipReason::Malformed), 10);
    assert_eq!(summary.total_skipped(), 10);
}

#[test]
fn buckets_match_independent_count() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(30, 50);
    let (path, text) = write_corpus(&dir, &s);
    let expected = texts_by_day(&text);
    assert_eq!(expected.len(), 30);
    assert!(expected.values().all(|v| v.len() == 50));

    let (records, _) = ingest_corpus(&[path], &opts(&s)).unwrap();
    let parts = partition_by_day(records);
    let got: BTreeMap<String, usize> = parts
        .iter()
        .map(|(d, v)| (d.to_string(), v.len()))
        .collect();
    let want: BTreeMap<String, usize> =
        expected.iter().map(|(d, v)| (d.clone(), v.len())).collect();
    assert_eq!(got, want);
}

#[test]
fn day_tables_and_sentences_match_recount() {
    let s = spec(30, 60);
    let text = generate_corpus(&s, &generate_lexicon(&s).unwrap()).unwrap();
    let stop = Stopwords::english();
    for (day, texts) in texts_by_day(&text) {
        let corpus = DayCorpus::from_texts(
            DayKey::parse(&day).unwrap(),
            &texts,
            &stop,
            HashtagMode::Remove,
        );

        let mut counts: HashMap<String, u64> = HashMap::new();
        for t in &texts {
            for w in oracle_tokens(t, &stop) {
                *counts.entry(w).or_default() += 1;
            }
        }
        let got: HashMap<String, u64> = corpus
            .table
            .counts
            .iter()
            .map(|(k, v)| (k.as_str().to_string(), *v))
            .collect();
        assert_eq!(got, counts, "{day}");
        assert_eq!(corpus.table.total_tokens, counts.values().sum::<u64>());

        let sentences: usize = texts.iter().map(|t| oracle_sentences(t)).sum();
        assert_eq!(corpus.sentences.sentences.len(), sentences, "{day}");
    }
}

#[test]
fn top_n_against_full_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let day = DayKey::parse("2020-07-01").unwrap();
    let counts: BTreeMap<Token, u64> = (0..1500)
        .map(|i| {
            (
                Token::new(&format!("tok{i}")).unwrap(),
                rng.random_range(1..40u64),
            )
        })
        .collect();
    let table = FrequencyTable {
        day,
        total_tokens: counts.values().sum(),
        counts,
    };
    let top = top_n_with_counts(&table, 1000);
    assert_eq!(top.len(), 1000);

    let mut all: Vec<(String, u64)> = table
        .counts
        .iter()
        .map(|(k, v)| (k.as_str().to_string(), *v))
        .collect();
    all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let want: Vec<(String, u64)> = all[..1000].to_vec();
    let got: Vec<(String, u64)> = top
        .iter()
        .map(|(t, c)| (t.as_str().to_string(), *c))
        .collect();
    assert_eq!(got, want);

    let min_in = got.iter().map(|(_, c)| *c).min().unwrap();
    assert!(all[1000..].iter().all(|(_, c)| *c <= min_in));
}

#[test]
fn lexicon_spot_check_against_file_text() {
    let s = SynthSpec {
        vocab_size: 5000 - 24,
        ..SynthSpec::default()
    };
    let lex = generate_lexicon(&s).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lexicon.txt");
    fs::write(&path, lex.render()).unwrap();
    let loaded = load_lexicon(&path).unwrap();
    assert_eq!(loaded.len(), 5000);
    assert_eq!(loaded.dim(), 16);

    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<(&str, Vec<f64>)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(' ');
            let tok = it.next().unwrap();
            (tok, it.map(|c| c.parse::<f64>().unwrap()).collect())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (tok, v) in rows.choose_multiple(&mut rng, 100) {
        assert_eq!(loaded.get(tok).unwrap().as_slice(), v.as_slice(), "{tok}");
    }
}

#[test]
fn sentence_calls_equal_distinct_sentences() {
    let day = DayKey::parse("2020-07-01").unwrap();
    let mut texts: Vec<String> = (0..4800)
        .map(|i| format!("war report number {i}."))
        .collect();
    texts.extend((0..200).map(|i| format!("war report number {}.", i * 7)));
    let corpus = DayCorpus::from_texts(day, &texts, &Stopwords::english(), HashtagMode::Remove);
    assert_eq!(corpus.sentences.sentences.len(), 5000);

    let lex = Lexicon::from_entries(
        2,
        vec![
            (
                "war".to_string(),
                EmbeddingVector::new(vec![1.0, 0.0]).unwrap(),
            ),
            (
                "report".to_string(),
                EmbeddingVector::new(vec![0.0, 1.0]).unwrap(),
            ),
        ],
    )
    .unwrap();
    let inner: Arc<dyn EmbedBackend> = Arc::new(LexiconBackend::new(lex));
    let cached = CachedBackend::new(inner);
    let targets = embed_targets(&["war".parse::<TargetSpec>().unwrap()], &cached).unwrap();
    let methods: [&dyn ScoringMethod; 1] = [&SentenceMethod];
    let (scores, calls) = score_run(
        &[corpus],
        &targets,
        &methods,
        &cached,
        &ScoreParams::default(),
    )
    .unwrap();
    assert_eq!(calls.get(day, "sentence"), 4800);
    assert_eq!(scores[0].items_considered, 5000);
    // Every sentence is "war report ...", composed to [1/2, 1/2].
    assert!((scores[0].score.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn spike_tokens_concentrate_in_window() {
    let s = SynthSpec::default();
    let lex = generate_lexicon(&s).unwrap();
    let text = generate_corpus(&s, &lex).unwrap();
    let cluster = &s.clusters[0].members;
    let window = s.spike_range().unwrap();
    let (mut in_hits, mut in_tweets, mut out_hits, mut out_tweets) =
        (0usize, 0usize, 0usize, 0usize);
    for (day, texts) in texts_by_day(&text) {
        let inside = window.contains(DayKey::parse(&day).unwrap());
        let hits: usize = texts
            .iter()
            .map(|t| {
                oracle_words(t)
                    .iter()
                    .filter(|w| {
                        cluster.contains(&w.trim_end_matches(['.', '!', '?']).to_lowercase())
                    })
                    .count()
            })
            .sum();
        if inside {
            in_hits += hits;
            in_tweets += texts.len();
        } else {
            out_hits += hits;
            out_tweets += texts.len();
        }
    }
    let in_rate = in_hits as f64 / in_tweets as f64;
    let out_rate = out_hits as f64 / out_tweets as f64;
    assert!(in_rate > 0.4 && in_rate < 0.6, "{in_rate}");
    assert!(in_rate >= 5.0 * out_rate, "{in_rate} vs {out_rate}");
}

#[test]
fn seeds_change_output() {
    let a = spec(3, 20);
    let b = SynthSpec {
        seed: 43,
        ..a.clone()
    };
    let ta = generate_corpus(&a, &generate_lexicon(&a).unwrap()).unwrap();
    let tb = generate_corpus(&b, &generate_lexicon(&b).unwrap()).unwrap();
    assert_ne!(ta, tb);
    assert_ne!(
        generate_lexicon(&a).unwrap().render(),
        generate_lexicon(&b).unwrap().render()
    );
    assert_eq!(
        ta,
        generate_corpus(&a, &generate_lexicon(&a).unwrap()).unwrap()
    );
}

#[test]
fn counts_sum_to_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(30, 40);
    let (path, _) = write_corpus(&dir, &s);
    let wide = DateRange::new(
        DayKey::parse("2020-06-25").unwrap(),
        DayKey::parse("2020-08-05").unwrap(),
    )
    .unwrap();
    let o = IngestOptions {
        range: wide,
        ..opts(&s)
    };
    let (records, summary) = ingest_corpus(&[path], &o).unwrap();
    let parts = partition_by_day(records);
    let csv = trendsim_core::report::render_counts_csv(&parts, &wide);
    let total: usize = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(csv.lines().count(), 1 + 42);
    assert_eq!(total, summary.accepted);
    assert_eq!(total, 1200);
}
