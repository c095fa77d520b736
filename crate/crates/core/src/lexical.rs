//! Tokens, stopwords, per-day frequency tables and sentence splitting.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::clean::{clean_text_with, CleanText, HashtagMode, Removals};
use crate::error::{Error, Result};
use crate::ingest::DayKey;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

pub const MIN_SENTENCE_CHARS: usize = 3;

/// Lowercase word unit: at least two characters, at least one letter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(String);

impl Token {
    pub fn new(s: &str) -> Option<Token> {
        let lower = s.to_lowercase();
        let valid = lower.chars().count() >= 2
            && lower.chars().any(char::is_alphabetic)
            && !lower.chars().any(char::is_whitespace);
        valid.then_some(Token(lower))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits on anything that is not a letter, a digit, or an apostrophe with
/// alphanumerics on both sides; lowercases; drops invalid tokens.
pub fn tokenize_str(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let keep = if c.is_alphanumeric() {
            true
        } else if is_apostrophe(c) {
            let before = i > 0 && chars[i - 1].is_alphanumeric() && !cur.is_empty();
            let after = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            before && after
        } else {
            false
        };
        if keep {
            cur.push(c);
        } else if !cur.is_empty() {
            tokens.extend(Token::new(&cur));
            cur.clear();
        }
    }
    if !cur.is_empty() {
        tokens.extend(Token::new(&cur));
    }
    tokens
}

pub fn tokenize(clean: &CleanText) -> Vec<Token> {
    tokenize_str(&clean.text)
}

#[derive(Debug, Clone, Default)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn parse(text: &str) -> Stopwords {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Stopwords> {
        let text = fs::read_to_string(path).map_err(|e| Error::Input {
            path: path.to_path_buf(),
            message: format!("cannot read stopword file: {e}"),
        })?;
        Ok(Stopwords::parse(&text))
    }

    pub fn english() -> Stopwords {
        Stopwords::parse(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(
            iter.into_iter()
                .map(|s| s.as_ref().to_lowercase())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    pub day: DayKey,
    pub counts: BTreeMap<Token, u64>,
    pub total_tokens: u64,
}

impl FrequencyTable {
    pub fn get(&self, word: &str) -> u64 {
        Token::new(word)
            .and_then(|t| self.counts.get(&t).copied())
            .unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

pub fn build_frequency_table(
    day: DayKey,
    cleaned: &[CleanText],
    stopwords: &Stopwords,
) -> FrequencyTable {
    let mut counts = BTreeMap::new();
    let mut total_tokens = 0;
    for tok in cleaned.iter().flat_map(tokenize) {
        if stopwords.contains(tok.as_str()) {
            continue;
        }
        *counts.entry(tok).or_insert(0) += 1;
        total_tokens += 1;
    }
    FrequencyTable {
        day,
        counts,
        total_tokens,
    }
}

/// Most frequent tokens, count descending, ties by token text ascending.
pub fn top_n(table: &FrequencyTable, n: usize) -> Vec<Token> {
    top_n_with_counts(table, n)
        .into_iter()
        .map(|(t, _)| t)
        .collect()
}

pub fn top_n_with_counts(table: &FrequencyTable, n: usize) -> Vec<(Token, u64)> {
    let mut entries: Vec<(&Token, u64)> = table.counts.iter().map(|(t, &c)| (t, c)).collect();
    // BTreeMap iteration is already text-ascending, so a stable sort on count keeps the tie order.
    entries.sort_by_key(|&(_, c)| Reverse(c));
    entries
        .into_iter()
        .take(n)
        .map(|(t, c)| (t.clone(), c))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceList {
    pub day: DayKey,
    pub sentences: Vec<String>,
}

/// Splits one text at runs of `.`, `!`, `?`, trimming and dropping
/// fragments shorter than three characters.
pub fn sentences_of(text: &str) -> impl Iterator<Item = &str> {
    text.split(['.', '!', '?'])
        .map(str::trim)
        .filter(|s| s.chars().count() >= MIN_SENTENCE_CHARS)
}

pub fn split_sentences(cleaned: &[CleanText], day: DayKey) -> SentenceList {
    let sentences = cleaned
        .iter()
        .flat_map(|c| sentences_of(&c.text))
        .map(str::to_owned)
        .collect();
    SentenceList { day, sentences }
}

/// Everything the scoring methods need from one day of tweets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayCorpus {
    pub day: DayKey,
    pub tweets: usize,
    pub table: FrequencyTable,
    pub sentences: SentenceList,
    pub removals: Removals,
}

impl DayCorpus {
    pub fn from_texts<S: AsRef<str>>(
        day: DayKey,
        raw: &[S],
        stopwords: &Stopwords,
        mode: HashtagMode,
    ) -> DayCorpus {
        let cleaned: Vec<CleanText> = raw
            .iter()
            .map(|t| clean_text_with(t.as_ref(), mode))
            .collect();
        let mut removals = Removals::default();
        for c in &cleaned {
            removals += c.removals;
        }
        DayCorpus {
            day,
            tweets: raw.len(),
            table: build_frequency_table(day, &cleaned, stopwords),
            sentences: split_sentences(&cleaned, day),
            removals,
        }
    }
}
