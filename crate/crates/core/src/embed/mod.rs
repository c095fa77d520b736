//! Embedding backends.
//!
//! Every provider implements [`EmbedBackend`] and is registered by scheme
//! name in a [`BackendRegistry`]; a run selects one with a spec string such
//! as `lexicon:/data/vectors.txt` or `service:http://127.0.0.1:8080`.
//! [`CachedBackend`] wraps any provider with memoization and call counting.

mod cache;
mod lexicon;
mod service;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

pub use cache::CachedBackend;
pub use lexicon::{load_lexicon, Lexicon, LexiconBackend};
pub use service::{EmbedRequest, EmbedResponse, InfoResponse, ServiceBackend, MAX_BATCH};

use crate::error::{Error, Result};

/// Finite, non-zero real vector. Shared cheaply between caches and scorers.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Arc<[f64]>);

impl EmbeddingVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("embedding has no components".into()));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid(
                "embedding has a non-finite component".into(),
            ));
        }
        if components.iter().all(|&c| c == 0.0) {
            return Err(Error::Invalid("embedding is all-zero".into()));
        }
        Ok(EmbeddingVector(components.into()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        EmbeddingVector::new(self.0.iter().map(|x| x * factor).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Lexicon,
    Composed,
    Remote,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbedResult {
    Hit {
        vector: EmbeddingVector,
        source: Source,
    },
    /// Out of vocabulary; only the lexicon backend produces this.
    Miss,
}

impl EmbedResult {
    pub fn vector(&self) -> Option<&EmbeddingVector> {
        match self {
            EmbedResult::Hit { vector, .. } => Some(vector),
            EmbedResult::Miss => None,
        }
    }

    pub fn source(&self) -> Option<Source> {
        match self {
            EmbedResult::Hit { source, .. } => Some(*source),
            EmbedResult::Miss => None,
        }
    }

    pub fn is_miss(&self) -> bool {
        matches!(self, EmbedResult::Miss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmbedKind {
    Word,
    Sentence,
}

pub trait EmbedBackend: Send + Sync {
    /// Scheme name this backend was registered under.
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    /// Human-readable identity for run summaries.
    fn describe(&self) -> String;

    /// Embeds `texts` in order. One result per input.
    fn embed_batch(&self, kind: EmbedKind, texts: &[&str]) -> Result<Vec<EmbedResult>>;

    fn embed_word(&self, token: &str) -> Result<EmbedResult> {
        single(self.embed_batch(EmbedKind::Word, &[token])?)
    }

    fn embed_sentence(&self, sentence: &str) -> Result<EmbedResult> {
        single(self.embed_batch(EmbedKind::Sentence, &[sentence])?)
    }
}

fn single(mut v: Vec<EmbedResult>) -> Result<EmbedResult> {
    match (v.pop(), v.is_empty()) {
        (Some(r), true) => Ok(r),
        _ => Err(Error::backend(
            "backend returned wrong number of results",
            false,
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackendOptions {
    pub timeout: Duration,
    pub retries: u32,
}

impl Default for BackendOptions {
    fn default() -> Self {
        BackendOptions {
            timeout: Duration::from_secs(10),
            retries: 2,
        }
    }
}

/// `scheme:argument`, e.g. `lexicon:vectors.txt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendSpec {
    pub scheme: String,
    pub arg: String,
}

impl FromStr for BackendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((scheme, arg)) if !scheme.is_empty() && !arg.is_empty() => Ok(BackendSpec {
                scheme: scheme.to_string(),
                arg: arg.to_string(),
            }),
            _ => Err(Error::config(
                "backend",
                format!("'{s}' is not of the form lexicon:<path> or service:<url>"),
            )),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scheme, self.arg)
    }
}

pub type BackendFactory = fn(&str, &BackendOptions) -> Result<Arc<dyn EmbedBackend>>;

pub struct BackendRegistry {
    factories: BTreeMap<&'static str, BackendFactory>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        BackendRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, scheme: &'static str, factory: BackendFactory) {
        self.factories.insert(scheme, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn open(&self, spec: &BackendSpec, opts: &BackendOptions) -> Result<Arc<dyn EmbedBackend>> {
        let factory = self.factories.get(spec.scheme.as_str()).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::config(
                "backend",
                format!(
                    "unknown backend '{}' (known: {})",
                    spec.scheme,
                    known.join(", ")
                ),
            )
        })?;
        factory(&spec.arg, opts)
    }
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut r = BackendRegistry::empty();
        r.register("lexicon", |path, _| {
            Ok(Arc::new(LexiconBackend::new(load_lexicon(path.as_ref())?)))
        });
        r.register("service", |url, opts| {
            Ok(Arc::new(ServiceBackend::connect(url, *opts)?))
        });
        r
    }
}
