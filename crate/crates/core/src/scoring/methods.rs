use std::collections::BTreeMap;
use std::sync::Arc;

use super::{ScoreParams, Unit, Weighting};
use crate::embed::EmbedKind;
use crate::error::{Error, Result};
use crate::lexical::{top_n_with_counts, DayCorpus, FrequencyTable, SentenceList};

/// A way of turning one day's corpus into the units whose similarity to a
/// target is averaged.
pub trait ScoringMethod: Send + Sync {
    fn name(&self) -> &'static str;

    /// Which embedding route the units go through.
    fn kind(&self) -> EmbedKind;

    fn units<'a>(&self, day: &'a DayCorpus, params: &ScoreParams) -> Vec<Unit<'a>>;

    /// Denominator used when the strict denominator is requested.
    fn nominal(&self, units: &[Unit<'_>], params: &ScoreParams) -> f64;
}

pub(super) fn word_units<'a>(table: &'a FrequencyTable, params: &ScoreParams) -> Vec<Unit<'a>> {
    let top = top_n_with_counts(table, params.top_n);
    top.into_iter()
        .map(|(tok, count)| {
            // Borrow the key stored in the table rather than the cloned token.
            let (key, _) = table
                .counts
                .get_key_value(&tok)
                .expect("token from this table");
            Unit {
                text: key.as_str(),
                weight: match params.weighting {
                    Weighting::Unweighted => 1.0,
                    Weighting::Frequency => count as f64,
                },
            }
        })
        .collect()
}

pub(super) fn sentence_units(sentences: &SentenceList) -> Vec<Unit<'_>> {
    sentences
        .sentences
        .iter()
        .map(|s| Unit {
            text: s.as_str(),
            weight: 1.0,
        })
        .collect()
}

/// Top-N words of the day's frequency table, each counted once.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordMethod;

impl ScoringMethod for WordMethod {
    fn name(&self) -> &'static str {
        "word"
    }

    fn kind(&self) -> EmbedKind {
        EmbedKind::Word
    }

    fn units<'a>(&self, day: &'a DayCorpus, params: &ScoreParams) -> Vec<Unit<'a>> {
        word_units(&day.table, params)
    }

    fn nominal(&self, units: &[Unit<'_>], params: &ScoreParams) -> f64 {
        match params.weighting {
            Weighting::Unweighted => params.top_n as f64,
            Weighting::Frequency => units.iter().map(|u| u.weight).sum(),
        }
    }
}

/// Every sentence of the day; repeated sentences count every time.
#[derive(Debug, Clone, Copy, Default)]
pub struct SentenceMethod;

impl ScoringMethod for SentenceMethod {
    fn name(&self) -> &'static str {
        "sentence"
    }

    fn kind(&self) -> EmbedKind {
        EmbedKind::Sentence
    }

    fn units<'a>(&self, day: &'a DayCorpus, _params: &ScoreParams) -> Vec<Unit<'a>> {
        sentence_units(&day.sentences)
    }

    fn nominal(&self, units: &[Unit<'_>], _params: &ScoreParams) -> f64 {
        units.len() as f64
    }
}

pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Arc<dyn ScoringMethod>>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        MethodRegistry {
            methods: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, method: Arc<dyn ScoringMethod>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ScoringMethod>> {
        self.methods.get(name).cloned().ok_or_else(|| {
            Error::config(
                "method",
                format!(
                    "unknown method '{name}' (known: {})",
                    self.names().collect::<Vec<_>>().join(", ")
                ),
            )
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.methods.keys().copied()
    }

    /// Resolves `word`, `sentence`, a comma list, or `both`/`all`.
    pub fn select(&self, spec: &str) -> Result<Vec<Arc<dyn ScoringMethod>>> {
        let spec = spec.trim();
        if spec == "both" || spec == "all" {
            return Ok(self.methods.values().cloned().collect());
        }
        let mut out: Vec<Arc<dyn ScoringMethod>> = Vec::new();
        for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let m = self.get(name)?;
            if !out.iter().any(|o| o.name() == m.name()) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(Error::config("method", "no scoring method selected"));
        }
        out.sort_by_key(|m| m.name());
        Ok(out)
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut r = MethodRegistry::empty();
        r.register(Arc::new(WordMethod));
        r.register(Arc::new(SentenceMethod));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_selection() {
        let r = MethodRegistry::default();
        let names = |v: Vec<Arc<dyn ScoringMethod>>| v.iter().map(|m| m.name()).collect::<Vec<_>>();
        assert_eq!(names(r.select("both").unwrap()), ["sentence", "word"]);
        assert_eq!(names(r.select("word").unwrap()), ["word"]);
        assert_eq!(
            names(r.select("word,sentence,word").unwrap()),
            ["sentence", "word"]
        );
        assert!(r.select("tfidf").is_err());
        assert!(r.select("").is_err());
    }
}
