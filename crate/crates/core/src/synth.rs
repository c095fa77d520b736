//! Seeded synthetic corpora and clustered lexicons.
//!
//! The lexicon places each named cluster around its own centroid; centroids
//! are mutually orthogonal, members are `normalize(centroid + eps * noise)`.
//! Background vocabulary gets independent random directions. The corpus
//! draws baseline tweets from everything except the spike cluster, and in
//! the spike window swaps one token of a tweet for a spike-cluster token
//! with the configured probability. Output bytes depend only on the `SynthSpec`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::embed::{EmbeddingVector, Lexicon};
use crate::error::{Error, Result};
use crate::ingest::{DateRange, DayKey};
use crate::lexical::Stopwords;
use crate::report::fmt6;
use crate::scoring::cosine_slices;

/// Squared noise norm relative to the unit centroid.
const CLUSTER_SPREAD: f64 = 0.08;
const MAX_ATTEMPTS: usize = 64;
const FILLER: &[&str] = &["the", "and", "of", "to", "in", "is", "for", "on"];

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeSpec {
    pub cluster: String,
    /// 1-based day indices, inclusive.
    pub from_day: u32,
    pub to_day: u32,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub start: DayKey,
    pub days: u32,
    pub tweets_per_day: u32,
    /// Number of background tokens in addition to the cluster members.
    pub vocab_size: usize,
    pub dim: usize,
    pub clusters: Vec<ClusterSpec>,
    pub intra_min: f64,
    pub inter_max: f64,
    pub spike: Option<SpikeSpec>,
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 42,
            start: DayKey::parse("2020-07-01").expect("valid date"),
            days: 30,
            tweets_per_day: 200,
            vocab_size: 1000,
            dim: 16,
            clusters: vec![
                ClusterSpec {
                    name: "conflict".into(),
                    members: words(&[
                        "war",
                        "peace",
                        "army",
                        "soldier",
                        "attack",
                        "battle",
                        "ceasefire",
                        "troops",
                        "conflict",
                        "border",
                        "missile",
                        "treaty",
                    ]),
                },
                ClusterSpec {
                    name: "technology".into(),
                    members: words(&[
                        "computer",
                        "software",
                        "laptop",
                        "keyboard",
                        "internet",
                        "server",
                        "program",
                        "digital",
                        "network",
                        "device",
                        "processor",
                        "database",
                    ]),
                },
            ],
            intra_min: 0.7,
            inter_max: 0.3,
            spike: Some(SpikeSpec {
                cluster: "conflict".into(),
                from_day: 10,
                to_day: 15,
                rate: 0.5,
            }),
        }
    }
}

impl SynthSpec {
    pub fn range(&self) -> DateRange {
        let end = DayKey(self.start.0 + chrono::Days::new(u64::from(self.days.saturating_sub(1))));
        DateRange {
            start: self.start,
            end,
        }
    }

    /// Dates covered by the spike window, if any.
    pub fn spike_range(&self) -> Option<DateRange> {
        self.spike.as_ref().map(|s| DateRange {
            start: DayKey(self.start.0 + chrono::Days::new(u64::from(s.from_day - 1))),
            end: DayKey(self.start.0 + chrono::Days::new(u64::from(s.to_day - 1))),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::config(field, msg));
        if self.days == 0 {
            return bad("days", "must be at least 1".into());
        }
        if self.tweets_per_day == 0 {
            return bad("tweets-per-day", "must be at least 1".into());
        }
        if self.dim == 0 {
            return bad("dim", "must be at least 1".into());
        }
        if self.vocab_size == 0 {
            return bad("vocab-size", "must be at least 1".into());
        }
        if !(self.intra_min > self.inter_max && self.intra_min <= 1.0 && self.inter_max >= -1.0) {
            return bad(
                "intra-min",
                format!(
                    "need inter-max {} < intra-min {} <= 1",
                    self.inter_max, self.intra_min
                ),
            );
        }
        let mut seen = HashSet::new();
        for c in &self.clusters {
            if c.members.is_empty() {
                return bad("cluster", format!("cluster '{}' has no members", c.name));
            }
            for m in &c.members {
                if crate::lexical::Token::new(m)
                    .map(|t| t.as_str() != m)
                    .unwrap_or(true)
                {
                    return bad("cluster", format!("'{m}' is not a lowercase token"));
                }
                if !seen.insert(m.as_str()) {
                    return bad(
                        "cluster",
                        format!("clusters are not disjoint: '{m}' repeats"),
                    );
                }
            }
        }
        if let Some(s) = &self.spike {
            if !self.clusters.iter().any(|c| c.name == s.cluster) {
                return bad("spike-cluster", format!("no cluster named '{}'", s.cluster));
            }
            if !(1 <= s.from_day && s.from_day <= s.to_day && s.to_day <= self.days) {
                return bad(
                    "spike-window",
                    format!(
                        "days {}..{} not within 1..{}",
                        s.from_day, s.to_day, self.days
                    ),
                );
            }
            if !(s.rate > 0.0 && s.rate <= 1.0) {
                return bad("spike-rate", format!("{} not in (0, 1]", s.rate));
            }
        }
        Ok(())
    }
}

/// Generated token vectors, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthLexicon {
    pub dim: usize,
    pub entries: Vec<(String, Vec<f64>)>,
    /// Indices into `entries` for each cluster, in `SynthSpec::clusters` order.
    pub clusters: Vec<Vec<usize>>,
    /// Indices of background tokens.
    pub background: Vec<usize>,
}

impl SynthLexicon {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.entries.len(), self.dim);
        for (token, v) in &self.entries {
            out.push_str(token);
            for c in v {
                let _ = write!(out, " {}", fmt6(*c));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_lexicon(&self) -> Result<Lexicon> {
        Lexicon::from_entries(
            self.dim,
            self.entries
                .iter()
                .map(|(t, v)| Ok((t.clone(), EmbeddingVector::new(v.clone())?)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.entries[idx].0
    }
}

/// Rounds to the precision written to the file so checks see what loaders see.
fn quantize(v: &mut [f64]) {
    for c in v.iter_mut() {
        *c = fmt6(*c).parse().expect("formatted float");
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Pronounceable background word for index `i`, never colliding with `taken`.
fn background_names(count: usize, taken: &HashSet<&str>, stop: &Stopwords) -> Vec<String> {
    const CONS: &[u8] = b"bdfgklmnprstvz";
    const VOW: &[u8] = b"aeiou";
    let syl = CONS.len() * VOW.len();
    let block = syl * syl * syl;
    let mut out = Vec::with_capacity(count);
    let mut i = 0usize;
    while out.len() < count {
        let mut word = String::new();
        // 7919 is coprime to the block size, so this permutes each block.
        let mut k = (i % block) * 7919 % block + i / block * block;
        for _ in 0..3 {
            let s = k % syl;
            k /= syl;
            word.push(CONS[s / VOW.len()] as char);
            word.push(VOW[s % VOW.len()] as char);
        }
        if k > 0 {
            word.push_str(&k.to_string());
        }
        if !taken.contains(word.as_str()) && !stop.contains(&word) {
            out.push(word);
        }
        i += 1;
    }
    out
}

pub fn generate_lexicon(spec: &SynthSpec) -> Result<SynthLexicon> {
    spec.validate()?;
    let k = spec.clusters.len();
    if k > 0 && (spec.dim < 2 || spec.dim < k) {
        return Err(Error::config(
            "dim",
            format!(
                "infeasible geometry: {k} cluster(s) need {} orthogonal directions (and at least 2) to separate intra >= {} from inter <= {}, dim is {}",
                k.max(2),
                spec.intra_min,
                spec.inter_max,
                spec.dim
            ),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let eps = (CLUSTER_SPREAD / spec.dim as f64).sqrt();
    let mut cluster_vectors = None;
    for _ in 0..MAX_ATTEMPTS {
        // Gram-Schmidt on random draws gives uniformly oriented orthonormal centroids.
        let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
        while centroids.len() < k {
            let mut v = gaussian(&mut rng, spec.dim);
            for c in &centroids {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
            if v.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
                normalize(&mut v);
                centroids.push(v);
            }
        }
        let members: Vec<Vec<Vec<f64>>> = spec
            .clusters
            .iter()
            .zip(&centroids)
            .map(|(c, centroid)| {
                c.members
                    .iter()
                    .map(|_| {
                        let noise = gaussian(&mut rng, spec.dim);
                        let mut v: Vec<f64> = centroid
                            .iter()
                            .zip(&noise)
                            .map(|(a, n)| a + eps * n)
                            .collect();
                        normalize(&mut v);
                        quantize(&mut v);
                        v
                    })
                    .collect()
            })
            .collect();
        if bounds_hold(&members, spec.intra_min, spec.inter_max) {
            cluster_vectors = Some(members);
            break;
        }
    }
    let cluster_vectors = cluster_vectors.ok_or_else(|| {
        Error::config(
            "dim",
            format!(
                "could not place clusters with intra >= {} and inter <= {} in dim {} after {MAX_ATTEMPTS} attempts",
                spec.intra_min, spec.inter_max, spec.dim
            ),
        )
    })?;

    let mut entries = Vec::new();
    let mut clusters = Vec::new();
    for (c, vecs) in spec.clusters.iter().zip(cluster_vectors) {
        let mut idx = Vec::new();
        for (m, v) in c.members.iter().zip(vecs) {
            idx.push(entries.len());
            entries.push((m.clone(), v));
        }
        clusters.push(idx);
    }
    let taken: HashSet<&str> = spec
        .clusters
        .iter()
        .flat_map(|c| c.members.iter().map(String::as_str))
        .collect();
    let names = background_names(spec.vocab_size, &taken, &Stopwords::english());
    let mut background = Vec::new();
    for name in names {
        let mut v = gaussian(&mut rng, spec.dim);
        normalize(&mut v);
        quantize(&mut v);
        if v.iter().all(|&c| c == 0.0) {
            v[0] = 1.0;
        }
        background.push(entries.len());
        entries.push((name, v));
    }
    Ok(SynthLexicon {
        dim: spec.dim,
        entries,
        clusters,
        background,
    })
}

fn bounds_hold(clusters: &[Vec<Vec<f64>>], intra_min: f64, inter_max: f64) -> bool {
    let cos = |a: &[f64], b: &[f64]| cosine_slices(a, b).ok();
    for (ci, a) in clusters.iter().enumerate() {
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                if !cos(&a[i], &a[j]).is_some_and(|c| c >= intra_min) {
                    return false;
                }
            }
        }
        for b in &clusters[ci + 1..] {
            for x in a {
                for y in b {
                    if !cos(x, y).is_some_and(|c| c <= inter_max) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[derive(Serialize)]
struct JsonTweet<'a> {
    id: String,
    created_at: String,
    lang: &'a str,
    text: String,
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// JSONL corpus, one tweet per line, `tweets_per_day` lines per day.
pub fn generate_corpus(spec: &SynthSpec, lexicon: &SynthLexicon) -> Result<String> {
    spec.validate()?;
    if lexicon.clusters.len() != spec.clusters.len() {
        return Err(Error::config(
            "lexicon",
            "lexicon does not cover the spec's clusters",
        ));
    }
    for (c, idx) in spec.clusters.iter().zip(&lexicon.clusters) {
        let have: Vec<&str> = idx.iter().map(|&i| lexicon.token(i)).collect();
        if have != c.members.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::config(
                "lexicon",
                format!("lexicon does not cover cluster '{}'", c.name),
            ));
        }
    }

    let spike_cluster = spec
        .spike
        .as_ref()
        .and_then(|s| spec.clusters.iter().position(|c| c.name == s.cluster));
    let spike_tokens: Vec<&str> = spike_cluster
        .map(|ci| {
            lexicon.clusters[ci]
                .iter()
                .map(|&i| lexicon.token(i))
                .collect()
        })
        .unwrap_or_default();
    let baseline: Vec<&str> = lexicon
        .clusters
        .iter()
        .enumerate()
        .filter(|(ci, _)| Some(*ci) != spike_cluster)
        .flat_map(|(_, idx)| idx.iter())
        .chain(&lexicon.background)
        .map(|&i| lexicon.token(i))
        .collect();
    if baseline.is_empty() {
        return Err(Error::config("vocab-size", "no baseline vocabulary left"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let mut out = String::new();
    let mut serial = 0u64;
    for d in 1..=spec.days {
        let date = spec.start.0 + chrono::Days::new(u64::from(d - 1));
        let in_spike = spec
            .spike
            .as_ref()
            .is_some_and(|s| s.from_day <= d && d <= s.to_day);
        for _ in 0..spec.tweets_per_day {
            serial += 1;
            let n_sent = rng.random_range(1..=3usize);
            let mut sentences: Vec<Vec<String>> = (0..n_sent)
                .map(|_| {
                    let len = rng.random_range(3..=7usize);
                    let mut words: Vec<String> = (0..len)
                        .map(|_| baseline.choose(&mut rng).expect("non-empty").to_string())
                        .collect();
                    if rng.random_bool(0.5) {
                        let pos = rng.random_range(1..=words.len());
                        words.insert(pos, FILLER.choose(&mut rng).expect("non-empty").to_string());
                    }
                    words
                })
                .collect();
            if in_spike {
                let rate = spec.spike.as_ref().map_or(0.0, |s| s.rate);
                if rng.random_bool(rate) {
                    let si = rng.random_range(0..sentences.len());
                    let wi = rng.random_range(0..sentences[si].len());
                    sentences[si][wi] = spike_tokens
                        .choose(&mut rng)
                        .expect("non-empty")
                        .to_string();
                }
            }
            let mut text = String::new();
            if rng.random_bool(0.1) {
                let _ = write!(text, "@user{} ", rng.random_range(1..500u32));
            }
            for (i, words) in sentences.iter().enumerate() {
                if i > 0 {
                    text.push(' ');
                }
                text.push_str(&capitalize(&words[0]));
                for w in &words[1..] {
                    text.push(' ');
                    text.push_str(w);
                }
                text.push(*['.', '!', '?'].choose(&mut rng).expect("non-empty"));
            }
            if rng.random_bool(0.15) {
                let slug: String = (0..8)
                    .map(|_| {
                        *b"abcdefghijkmnpqrstuvwxyzABCDEFGHJKLMNPQRSTUVWXYZ23456789"
                            .choose(&mut rng)
                            .unwrap() as char
                    })
                    .collect();
                let _ = write!(text, " https://t.co/{slug}");
            }
            if rng.random_bool(0.1) {
                let _ = write!(text, " #{}", baseline.choose(&mut rng).unwrap());
            }
            if rng.random_bool(0.05) {
                text.push_str(" \u{1F642}");
            }
            let secs = rng.random_range(0..86_400u32);
            let created_at = format!(
                "{}T{:02}:{:02}:{:02}Z",
                date.format("%Y-%m-%d"),
                secs / 3600,
                secs / 60 % 60,
                secs % 60
            );
            let line = serde_json::to_string(&JsonTweet {
                id: format!("{serial:08}"),
                created_at,
                lang: "en",
                text,
            })
            .expect("serializable");
            out.push_str(&line);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Writes the corpus and lexicon files for `spec`.
pub fn write_synth(spec: &SynthSpec, corpus: &Path, lexicon: &Path) -> Result<()> {
    let lex = generate_lexicon(spec)?;
    let text = generate_corpus(spec, &lex)?;
    fs::write(lexicon, lex.render()).map_err(|e| Error::io(lexicon, e))?;
    fs::write(corpus, text).map_err(|e| Error::io(corpus, e))?;
    Ok(())
}
