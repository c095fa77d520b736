//! JSONL tweet ingestion and UTC day partitioning.
//!
//! Each input line is one JSON object with `id`, `created_at` (RFC 3339),
//! `lang` and `text`. Unknown keys are ignored. Lines that fail to parse or
//! validate are skipped and counted; a file where more than half of the lines
//! are malformed is rejected outright.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, SubsecRound, Utc};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const MAX_TEXT_CHARS: usize = 4000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub lang: String,
    pub text: String,
}

impl TweetRecord {
    pub fn day(&self) -> DayKey {
        DayKey(self.created_at.date_naive())
    }
}

/// Calendar date in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DayKey(pub NaiveDate);

impl DayKey {
    pub fn parse(s: &str) -> Option<DayKey> {
        NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
            .ok()
            .map(DayKey)
    }

    pub fn date(self) -> NaiveDate {
        self.0
    }
}

impl fmt::Display for DayKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

/// Inclusive date interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateRange {
    pub start: DayKey,
    pub end: DayKey,
}

impl DateRange {
    pub fn new(start: DayKey, end: DayKey) -> Result<Self> {
        if start > end {
            return Err(Error::config(
                "from",
                format!("range start {start} is after end {end}"),
            ));
        }
        Ok(DateRange { start, end })
    }

    pub fn contains(&self, day: DayKey) -> bool {
        self.start <= day && day <= self.end
    }

    pub fn days(&self) -> impl Iterator<Item = DayKey> + '_ {
        self.start
            .0
            .iter_days()
            .take_while(move |d| *d <= self.end.0)
            .map(DayKey)
    }

    pub fn len_days(&self) -> i64 {
        (self.end.0 - self.start.0).num_days() + 1
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SkipReason {
    Malformed,
    Language,
    OutOfRange,
    Retweet,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::Malformed => "malformed",
            SkipReason::Language => "language",
            SkipReason::OutOfRange => "out-of-range",
            SkipReason::Retweet => "retweet",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub range: DateRange,
    pub lang: String,
    /// Drop records whose text starts with `RT @`.
    pub exclude_retweets: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub total_lines: usize,
    pub accepted: usize,
    pub skipped: BTreeMap<SkipReason, usize>,
    pub duplicates: usize,
}

impl IngestSummary {
    pub fn skipped(&self, reason: SkipReason) -> usize {
        self.skipped.get(&reason).copied().unwrap_or(0)
    }

    pub fn total_skipped(&self) -> usize {
        self.skipped.values().sum()
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    created_at: String,
    lang: String,
    text: String,
}

/// Parses and validates one JSONL line. `None` means malformed.
pub fn parse_line(line: &str) -> Option<TweetRecord> {
    let raw: RawRecord = serde_json::from_str(line).ok()?;
    if raw.id.is_empty() {
        return None;
    }
    let created_at = DateTime::parse_from_rfc3339(raw.created_at.trim())
        .ok()?
        .with_timezone(&Utc)
        .trunc_subsecs(0);
    if raw.text.trim().is_empty() || raw.text.chars().count() > MAX_TEXT_CHARS {
        return None;
    }
    Some(TweetRecord {
        id: raw.id,
        created_at,
        lang: raw.lang.trim().to_lowercase(),
        text: raw.text,
    })
}

enum LineOutcome {
    Record(TweetRecord),
    Skip(SkipReason),
}

struct FileScan {
    outcomes: Vec<LineOutcome>,
}

fn classify(line: &str, opts: &IngestOptions) -> LineOutcome {
    let Some(rec) = parse_line(line) else {
        return LineOutcome::Skip(SkipReason::Malformed);
    };
    if rec.lang != opts.lang {
        LineOutcome::Skip(SkipReason::Language)
    } else if !opts.range.contains(rec.day()) {
        LineOutcome::Skip(SkipReason::OutOfRange)
    } else if opts.exclude_retweets && rec.text.starts_with("RT @") {
        LineOutcome::Skip(SkipReason::Retweet)
    } else {
        LineOutcome::Record(rec)
    }
}

fn scan_file(path: &Path, opts: &IngestOptions) -> Result<FileScan> {
    let file = File::open(path).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        message: format!("cannot open: {e}"),
    })?;
    let mut outcomes = Vec::new();
    let mut malformed = 0usize;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::Input {
            path: path.to_path_buf(),
            message: format!("read failed: {e}"),
        })?;
        let outcome = classify(&line, opts);
        if matches!(outcome, LineOutcome::Skip(SkipReason::Malformed)) {
            malformed += 1;
        }
        outcomes.push(outcome);
    }
    if malformed * 2 > outcomes.len() {
        return Err(Error::Input {
            path: path.to_path_buf(),
            message: format!(
                "{malformed} of {} lines are malformed; expected JSONL with id, created_at, lang, text",
                outcomes.len()
            ),
        });
    }
    Ok(FileScan { outcomes })
}

/// Reads every file, filters records, and drops duplicate ids after their
/// first occurrence. Files are scanned concurrently; the merged result
/// follows path order, then line order within each file.
pub fn ingest_corpus(
    paths: &[PathBuf],
    opts: &IngestOptions,
) -> Result<(Vec<TweetRecord>, IngestSummary)> {
    let scans: Vec<FileScan> = paths
        .par_iter()
        .map(|p| scan_file(p, opts))
        .collect::<Result<_>>()?;

    let mut summary = IngestSummary::default();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for scan in scans {
        summary.total_lines += scan.outcomes.len();
        for outcome in scan.outcomes {
            match outcome {
                LineOutcome::Skip(reason) => *summary.skipped.entry(reason).or_default() += 1,
                LineOutcome::Record(rec) => {
                    if seen.insert(rec.id.clone()) {
                        records.push(rec);
                    } else {
                        summary.duplicates += 1;
                    }
                }
            }
        }
    }
    summary.accepted = records.len();
    Ok((records, summary))
}

pub type Partitions = BTreeMap<DayKey, Vec<TweetRecord>>;

pub fn partition_by_day(records: impl IntoIterator<Item = TweetRecord>) -> Partitions {
    let mut map = Partitions::new();
    for rec in records {
        map.entry(rec.day()).or_default().push(rec);
    }
    map
}
