//! Cosine similarity and daily mean similarity scores.
//!
//! A score for one (day, target, method) is the mean cosine between the
//! target's vector and the vectors of the day's units. The unit set comes
//! from the [`ScoringMethod`]: the top-N words of the frequency table, or
//! every sentence of the day. Units without an embedding are excluded from
//! the mean and reported through coverage.

mod calls;
mod methods;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use calls::CallReport;
pub use methods::{MethodRegistry, ScoringMethod, SentenceMethod, WordMethod};

use crate::embed::{CachedBackend, EmbedBackend, EmbedKind, EmbeddingVector};
use crate::error::{Error, Result};
use crate::ingest::DayKey;
use crate::lexical::{DayCorpus, FrequencyTable, SentenceList, Token};

/// `dot(a, b) / (|a| |b|)` in f64, clamped to [-1, 1].
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    cosine_slices(a.as_slice(), b.as_slice())
}

pub fn cosine_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Invalid(format!(
            "cosine of vectors with dims {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let denom = na.sqrt() * nb.sqrt();
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Invalid("cosine of a zero-norm vector".into()));
    }
    Ok((dot / denom).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Subject,
    Control,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Subject => "subject",
            Role::Control => "control",
        }
    }
}

/// `label` or `label:control`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSpec {
    pub label: Token,
    pub role: Role,
}

impl FromStr for TargetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (label, role) = match s.split_once(':') {
            None => (s, Role::Subject),
            Some((l, "control")) => (l, Role::Control),
            Some((l, "subject")) => (l, Role::Subject),
            Some((_, other)) => {
                return Err(Error::config(
                    "target",
                    format!("unknown role '{other}' in '{s}' (subject|control)"),
                ))
            }
        };
        let label = Token::new(label.trim())
            .ok_or_else(|| Error::config("target", format!("'{label}' is not a valid token")))?;
        Ok(TargetSpec { label, role })
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Subject => write!(f, "{}", self.label),
            Role::Control => write!(f, "{}:control", self.label),
        }
    }
}

/// Checks label uniqueness and that at least `min` targets and one subject exist.
pub fn validate_targets(specs: &[TargetSpec], min: usize) -> Result<()> {
    if specs.len() < min {
        return Err(Error::config(
            "target",
            format!("need at least {min} target(s), got {}", specs.len()),
        ));
    }
    if !specs.iter().any(|t| t.role == Role::Subject) {
        return Err(Error::config("target", "no subject target given"));
    }
    for (i, t) in specs.iter().enumerate() {
        if specs[..i].iter().any(|o| o.label == t.label) {
            return Err(Error::config(
                "target",
                format!("duplicate label '{}'", t.label),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetWord {
    pub label: Token,
    pub vector: EmbeddingVector,
    pub role: Role,
}

/// Embeds every target with the word route. A target the backend cannot
/// embed is a configuration error.
pub fn embed_targets(specs: &[TargetSpec], backend: &dyn EmbedBackend) -> Result<Vec<TargetWord>> {
    let labels: Vec<&str> = specs.iter().map(|s| s.label.as_str()).collect();
    let results = backend.embed_batch(EmbedKind::Word, &labels)?;
    specs
        .iter()
        .zip(results)
        .map(|(spec, r)| match r.vector() {
            Some(v) => Ok(TargetWord {
                label: spec.label.clone(),
                vector: v.clone(),
                role: spec.role,
            }),
            None => Err(Error::config(
                "target",
                format!("'{}' has no embedding in the backend", spec.label),
            )),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Unweighted,
    Frequency,
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unweighted" => Ok(Weighting::Unweighted),
            "frequency" => Ok(Weighting::Frequency),
            other => Err(Error::config(
                "weighting",
                format!("unknown weighting '{other}' (unweighted|frequency)"),
            )),
        }
    }
}

impl Weighting {
    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::Unweighted => "unweighted",
            Weighting::Frequency => "frequency",
        }
    }
}

pub const DEFAULT_TOP_N: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreParams {
    pub top_n: usize,
    /// Divide by the nominal unit count (n for words) instead of the number
    /// of embedded units.
    pub strict_denominator: bool,
    pub weighting: Weighting,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams {
            top_n: DEFAULT_TOP_N,
            strict_denominator: false,
            weighting: Weighting::Unweighted,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyScore {
    pub day: DayKey,
    pub target: String,
    pub method: &'static str,
    /// `None` marks an EMPTY record: nothing could be embedded.
    pub score: Option<f64>,
    pub items_embedded: usize,
    pub items_considered: usize,
}

impl DailyScore {
    pub fn coverage(&self) -> Option<f64> {
        (self.items_considered > 0)
            .then(|| self.items_embedded as f64 / self.items_considered as f64)
    }

    pub fn is_empty(&self) -> bool {
        self.score.is_none()
    }
}

/// One unit of a day: its text and its weight in the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unit<'a> {
    pub text: &'a str,
    pub weight: f64,
}

/// Mean of `weight * cosine(unit, target)` over embedded units.
pub fn score_units(
    method: &dyn ScoringMethod,
    day: DayKey,
    units: &[Unit<'_>],
    nominal: f64,
    target: &TargetWord,
    backend: &dyn EmbedBackend,
    params: &ScoreParams,
) -> Result<DailyScore> {
    let mut distinct: Vec<&str> = units.iter().map(|u| u.text).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let results = backend.embed_batch(method.kind(), &distinct)?;

    let mut total = 0.0f64;
    let mut weight = 0.0f64;
    let mut embedded = 0usize;
    for unit in units {
        let idx = distinct
            .binary_search(&unit.text)
            .expect("unit text was embedded");
        if let Some(v) = results[idx].vector() {
            total += unit.weight * cosine(v, &target.vector)?;
            weight += unit.weight;
            embedded += 1;
        }
    }
    let score = if embedded == 0 {
        None
    } else if params.strict_denominator {
        Some(total / nominal)
    } else {
        Some(total / weight)
    };
    Ok(DailyScore {
        day,
        target: target.label.to_string(),
        method: method.name(),
        score,
        items_embedded: embedded,
        items_considered: units.len(),
    })
}

pub fn score_day(
    method: &dyn ScoringMethod,
    corpus: &DayCorpus,
    target: &TargetWord,
    backend: &dyn EmbedBackend,
    params: &ScoreParams,
) -> Result<DailyScore> {
    let units = method.units(corpus, params);
    let nominal = method.nominal(&units, params);
    score_units(method, corpus.day, &units, nominal, target, backend, params)
}

/// Word method over one frequency table with default options.
pub fn dmss_word(
    table: &FrequencyTable,
    n: usize,
    target: &TargetWord,
    backend: &dyn EmbedBackend,
) -> Result<DailyScore> {
    let params = ScoreParams {
        top_n: n,
        ..ScoreParams::default()
    };
    let units = methods::word_units(table, &params);
    let nominal = WordMethod.nominal(&units, &params);
    score_units(
        &WordMethod,
        table.day,
        &units,
        nominal,
        target,
        backend,
        &params,
    )
}

pub fn dmss_sentence(
    sentences: &SentenceList,
    target: &TargetWord,
    backend: &dyn EmbedBackend,
) -> Result<DailyScore> {
    let params = ScoreParams::default();
    let units = methods::sentence_units(sentences);
    let nominal = SentenceMethod.nominal(&units, &params);
    score_units(
        &SentenceMethod,
        sentences.day,
        &units,
        nominal,
        target,
        backend,
        &params,
    )
}

/// Scores every (day, target, method) triple.
///
/// Embeddings are fetched day by day in date order first, so each day's
/// call count is well defined; the scoring itself then runs in parallel on
/// cache hits only. Output is sorted by (date, target, method).
pub fn score_run(
    days: &[DayCorpus],
    targets: &[TargetWord],
    methods: &[&dyn ScoringMethod],
    backend: &CachedBackend,
    params: &ScoreParams,
) -> Result<(Vec<DailyScore>, CallReport)> {
    let mut report = CallReport::default();
    for method in methods {
        for day in days {
            let units = method.units(day, params);
            let texts: Vec<&str> = units.iter().map(|u| u.text).collect();
            let calls = backend.prefetch(method.kind(), &texts)?;
            report.record(day.day, method.name(), calls);
        }
    }

    let jobs: Vec<(&DayCorpus, &TargetWord, &dyn ScoringMethod)> = days
        .iter()
        .flat_map(|d| {
            targets
                .iter()
                .flat_map(move |t| methods.iter().map(move |m| (d, t, *m)))
        })
        .collect();
    let mut scores = jobs
        .par_iter()
        .map(|(d, t, m)| score_day(*m, d, t, backend, params))
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| (a.day, &a.target, a.method).cmp(&(b.day, &b.target, b.method)));
    Ok((scores, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.cells[i][j])
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn transpose(&self) -> SimilarityMatrix {
        let k = self.size();
        SimilarityMatrix {
            labels: self.labels.clone(),
            cells: (0..k)
                .map(|i| (0..k).map(|j| self.cells[j][i]).collect())
                .collect(),
        }
    }
}

pub fn target_similarity_matrix(targets: &[TargetWord]) -> Result<SimilarityMatrix> {
    if targets.len() < 2 {
        return Err(Error::config(
            "target",
            format!(
                "similarity matrix needs at least 2 targets, got {}",
                targets.len()
            ),
        ));
    }
    let k = targets.len();
    let mut cells = vec![vec![0.0; k]; k];
    for i in 0..k {
        cells[i][i] = cosine(&targets[i].vector, &targets[i].vector)?;
        for j in i + 1..k {
            let c = cosine(&targets[i].vector, &targets[j].vector)?;
            cells[i][j] = c;
            cells[j][i] = c;
        }
    }
    Ok(SimilarityMatrix {
        labels: targets.iter().map(|t| t.label.to_string()).collect(),
        cells,
    })
}
