use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use super::{EmbedBackend, EmbedKind, EmbedResult, EmbeddingVector, Source};
use crate::error::{Error, Result};
use crate::lexical::tokenize_str;

/// Token to vector store read from a flat text file.
///
/// Line 1 is `<entry_count> <dim>`; every following line is
/// `<token> <c1> ... <cdim>`.
#[derive(Debug, Clone)]
pub struct Lexicon {
    dim: usize,
    entries: HashMap<String, EmbeddingVector>,
    source: PathBuf,
}

impl Lexicon {
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (String, EmbeddingVector)>,
    ) -> Result<Lexicon> {
        let mut map = HashMap::new();
        for (token, v) in entries {
            if v.dim() != dim {
                return Err(Error::Invalid(format!(
                    "vector for '{token}' has dim {}, expected {dim}",
                    v.dim()
                )));
            }
            if map.insert(token.clone(), v).is_some() {
                return Err(Error::Invalid(format!("duplicate token '{token}'")));
            }
        }
        Ok(Lexicon {
            dim,
            entries: map,
            source: PathBuf::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&EmbeddingVector> {
        self.entries.get(token)
    }

    pub fn source(&self) -> &Path {
        &self.source
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    let file = File::open(path).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        message: format!("cannot open lexicon: {e}"),
    })?;
    let fmt_err = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => {
            return Err(fmt_err(
                1,
                "empty file, expected '<entry_count> <dim>' header".into(),
            ))
        }
    };
    let (count, dim) = parse_header(&header).ok_or_else(|| {
        fmt_err(
            1,
            format!("bad header '{header}', expected '<entry_count> <dim>'"),
        )
    })?;

    let mut entries = HashMap::with_capacity(count);
    let mut body_lines = 0usize;
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        body_lines += 1;
        if body_lines > count {
            return Err(fmt_err(
                lineno,
                format!("header declares {count} entries but more lines follow"),
            ));
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap_or_default();
        if token.chars().any(char::is_uppercase) {
            return Err(fmt_err(lineno, format!("token '{token}' is not lowercase")));
        }
        let comps = fields
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| fmt_err(lineno, format!("bad component for '{token}': {e}")))?;
        if comps.len() != dim {
            return Err(fmt_err(
                lineno,
                format!(
                    "dimension mismatch: '{token}' has {} components, expected {dim}",
                    comps.len()
                ),
            ));
        }
        let vector =
            EmbeddingVector::new(comps).map_err(|e| fmt_err(lineno, format!("'{token}': {e}")))?;
        if entries.insert(token.to_string(), vector).is_some() {
            return Err(fmt_err(lineno, format!("duplicate token '{token}'")));
        }
    }
    if body_lines != count {
        return Err(fmt_err(
            body_lines + 2,
            format!("header declares {count} entries, found {body_lines}"),
        ));
    }
    Ok(Lexicon {
        dim,
        entries,
        source: path.to_path_buf(),
    })
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let count = it.next()?.parse().ok()?;
    let dim: usize = it.next()?.parse().ok()?;
    (it.next().is_none() && dim > 0).then_some((count, dim))
}

/// Offline backend: exact lookup for words, mean of in-vocabulary token
/// vectors for sentences.
#[derive(Debug, Clone)]
pub struct LexiconBackend {
    lexicon: Lexicon,
}

impl LexiconBackend {
    pub fn new(lexicon: Lexicon) -> Self {
        LexiconBackend { lexicon }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    fn word(&self, token: &str) -> EmbedResult {
        match self.lexicon.get(token) {
            Some(v) => EmbedResult::Hit {
                vector: v.clone(),
                source: Source::Lexicon,
            },
            None => EmbedResult::Miss,
        }
    }

    fn sentence(&self, sentence: &str) -> EmbedResult {
        let mut sum = vec![0.0f64; self.lexicon.dim];
        let mut n = 0usize;
        for tok in tokenize_str(sentence) {
            if let Some(v) = self.lexicon.get(tok.as_str()) {
                for (s, x) in sum.iter_mut().zip(v.as_slice()) {
                    *s += x;
                }
                n += 1;
            }
        }
        if n == 0 {
            return EmbedResult::Miss;
        }
        let mean = sum.into_iter().map(|s| s / n as f64).collect();
        // Tokens that cancel exactly leave no direction to compare against.
        match EmbeddingVector::new(mean) {
            Ok(vector) => EmbedResult::Hit {
                vector,
                source: Source::Composed,
            },
            Err(_) => EmbedResult::Miss,
        }
    }
}

impl EmbedBackend for LexiconBackend {
    fn name(&self) -> &'static str {
        "lexicon"
    }

    fn dim(&self) -> usize {
        self.lexicon.dim
    }

    fn describe(&self) -> String {
        format!(
            "lexicon {} ({} entries, dim {})",
            self.lexicon.source.display(),
            self.lexicon.len(),
            self.lexicon.dim
        )
    }

    fn embed_batch(&self, kind: EmbedKind, texts: &[&str]) -> Result<Vec<EmbedResult>> {
        Ok(texts
            .iter()
            .map(|t| match kind {
                EmbedKind::Word => self.word(t),
                EmbedKind::Sentence => self.sentence(t),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn lex_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn backend(entries: &[(&str, &[f64])]) -> LexiconBackend {
        let dim = entries[0].1.len();
        LexiconBackend::new(
            Lexicon::from_entries(
                dim,
                entries
                    .iter()
                    .map(|(t, v)| (t.to_string(), EmbeddingVector::new(v.to_vec()).unwrap())),
            )
            .unwrap(),
        )
    }

    #[test]
    fn loads_well_formed_file() {
        let f = lex_file("2 3\nwar 1 0 0\npeace 0 1 0\n");
        let lex = load_lexicon(f.path()).unwrap();
        assert_eq!(lex.dim(), 3);
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get("peace").unwrap().as_slice(), &[0.0, 1.0, 0.0]);
    }

    fn format_error_line(content: &str) -> usize {
        let f = lex_file(content);
        match load_lexicon(f.path()).unwrap_err() {
            Error::Format { line, .. } => line,
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn dimension_mismatch_reports_line() {
        assert_eq!(format_error_line("2 3\nwar 1 0\npeace 0 1 0\n"), 2);
        assert_eq!(format_error_line("2 3\nwar 1 0 0\npeace 0 1 0 4\n"), 3);
    }

    #[test]
    fn count_mismatch_and_duplicates() {
        assert_eq!(format_error_line("3 2\nwar 1 0\npeace 0 1\n"), 4);
        assert_eq!(format_error_line("1 2\nwar 1 0\npeace 0 1\n"), 3);
        assert_eq!(format_error_line("2 2\nwar 1 0\nwar 0 1\n"), 3);
        assert_eq!(format_error_line("1 2\nwar 0 0\n"), 2);
        assert_eq!(format_error_line("1 2\nWar 1 0\n"), 2);
        assert_eq!(format_error_line("two 2\n"), 1);
        assert_eq!(format_error_line(""), 1);
    }

    #[test]
    fn word_lookup_and_miss() {
        let b = backend(&[("war", &[1.0, 0.0, 0.0])]);
        let hit = b.embed_word("war").unwrap();
        assert_eq!(hit.vector().unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(hit.source(), Some(Source::Lexicon));
        assert!(b.embed_word("zebra").unwrap().is_miss());
    }

    #[test]
    fn sentence_composition() {
        let b = backend(&[("war", &[1.0, 0.0]), ("peace", &[0.0, 1.0])]);
        let r = b.embed_sentence("war peace").unwrap();
        assert_eq!(r.vector().unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(r.source(), Some(Source::Composed));
        assert!(b.embed_sentence("zzz qqq").unwrap().is_miss());

        let r = b.embed_sentence("War, war... peace!").unwrap();
        let v = r.vector().unwrap().as_slice();
        assert!((v[0] - 2.0 / 3.0).abs() < 1e-15 && (v[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cancelling_tokens_miss() {
        let b = backend(&[("up", &[1.0, 0.0]), ("down", &[-1.0, 0.0])]);
        assert!(b.embed_sentence("up down").unwrap().is_miss());
    }
}
