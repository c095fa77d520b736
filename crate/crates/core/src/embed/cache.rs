use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use super::{EmbedBackend, EmbedKind, EmbedResult};
use crate::error::Result;

/// Memoizing wrapper. Keys are the exact input strings, kept separately per
/// [`EmbedKind`]. Only inputs that reach the wrapped backend are counted.
pub struct CachedBackend {
    inner: Arc<dyn EmbedBackend>,
    words: RwLock<HashMap<String, EmbedResult>>,
    sentences: RwLock<HashMap<String, EmbedResult>>,
    word_calls: AtomicU64,
    sentence_calls: AtomicU64,
}

impl CachedBackend {
    pub fn new(inner: Arc<dyn EmbedBackend>) -> Self {
        CachedBackend {
            inner,
            words: RwLock::default(),
            sentences: RwLock::default(),
            word_calls: AtomicU64::new(0),
            sentence_calls: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &Arc<dyn EmbedBackend> {
        &self.inner
    }

    fn table(&self, kind: EmbedKind) -> &RwLock<HashMap<String, EmbedResult>> {
        match kind {
            EmbedKind::Word => &self.words,
            EmbedKind::Sentence => &self.sentences,
        }
    }

    fn counter(&self, kind: EmbedKind) -> &AtomicU64 {
        match kind {
            EmbedKind::Word => &self.word_calls,
            EmbedKind::Sentence => &self.sentence_calls,
        }
    }

    /// Number of inputs forwarded to the wrapped backend so far.
    pub fn calls(&self, kind: EmbedKind) -> u64 {
        self.counter(kind).load(Ordering::SeqCst)
    }

    pub fn cached(&self, kind: EmbedKind, text: &str) -> Option<EmbedResult> {
        self.table(kind).read().unwrap().get(text).cloned()
    }

    pub fn len(&self, kind: EmbedKind) -> usize {
        self.table(kind).read().unwrap().len()
    }

    /// Ensures every input is cached; returns how many had to be computed.
    pub fn prefetch(&self, kind: EmbedKind, texts: &[&str]) -> Result<u64> {
        let missing: Vec<&str> = {
            let table = self.table(kind).read().unwrap();
            let mut seen = HashSet::new();
            texts
                .iter()
                .copied()
                .filter(|t| !table.contains_key(*t) && seen.insert(*t))
                .collect()
        };
        if missing.is_empty() {
            return Ok(0);
        }
        let results = self.inner.embed_batch(kind, &missing)?;
        let n = missing.len() as u64;
        self.counter(kind).fetch_add(n, Ordering::SeqCst);
        let mut table = self.table(kind).write().unwrap();
        for (text, r) in missing.into_iter().zip(results) {
            // A concurrent prefetch may have inserted the same key; keep the first.
            table.entry(text.to_string()).or_insert(r);
        }
        Ok(n)
    }
}

impl EmbedBackend for CachedBackend {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }

    fn embed_batch(&self, kind: EmbedKind, texts: &[&str]) -> Result<Vec<EmbedResult>> {
        self.prefetch(kind, texts)?;
        let table = self.table(kind).read().unwrap();
        Ok(texts.iter().map(|t| table[*t].clone()).collect())
    }
}
