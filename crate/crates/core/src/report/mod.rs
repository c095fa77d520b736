//! CSV and SVG outputs. Every renderer is a pure function of its inputs;
//! the `emit_*` wrappers only add the file write.

mod spike;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

pub use spike::{spike_report, SpikeOutcome, SpikeReport};
pub use svg::{render_heatmap_svg, render_trend_svg, TREND_HEIGHT, TREND_WIDTH};

use crate::error::{Error, Result};
use crate::ingest::{DateRange, DayKey, Partitions};
use crate::scoring::{CallReport, DailyScore, SimilarityMatrix};

pub const SCORES_HEADER: &str = "date,target,method,score,items_embedded,items_considered,coverage";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MarkerStyle {
    Primary,
    Secondary,
}

/// A dated annotation drawn as a vertical dashed line on trend plots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventMarker {
    pub date: DayKey,
    pub label: String,
    pub style: MarkerStyle,
}

impl FromStr for EventMarker {
    type Err = Error;

    /// `YYYY-MM-DD:label:style`, style being `primary` or `secondary`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::config("marker", format!("'{s}': {why}"));
        let s = s.trim().trim_matches('"');
        let (date, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected YYYY-MM-DD:label:style"))?;
        let (label, style) = rest
            .rsplit_once(':')
            .ok_or_else(|| bad("expected YYYY-MM-DD:label:style"))?;
        let date = DayKey::parse(date).ok_or_else(|| bad("bad date"))?;
        let style = match style {
            "primary" => MarkerStyle::Primary,
            "secondary" => MarkerStyle::Secondary,
            _ => return Err(bad("style must be primary or secondary")),
        };
        Ok(EventMarker {
            date,
            label: label.to_string(),
            style,
        })
    }
}

/// Six decimals, without a negative sign on zero.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn render_scores_csv(scores: &[DailyScore]) -> String {
    let mut rows: Vec<&DailyScore> = scores.iter().collect();
    rows.sort_by(|a, b| (a.day, &a.target, a.method).cmp(&(b.day, &b.target, b.method)));
    let mut out = String::from(SCORES_HEADER);
    out.push('\n');
    for s in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.day,
            s.target,
            s.method,
            s.score.map(fmt6).unwrap_or_default(),
            s.items_embedded,
            s.items_considered,
            s.coverage().map(fmt6).unwrap_or_default(),
        );
    }
    out
}

pub fn emit_scores_csv(scores: &[DailyScore], path: &Path) -> Result<()> {
    write_file(path, &render_scores_csv(scores))
}

/// One row per day of `range`, zero-count days included.
pub fn render_counts_csv(partitions: &Partitions, range: &DateRange) -> String {
    let mut out = String::from("date,tweet_count\n");
    for day in range.days() {
        let n = partitions.get(&day).map_or(0, Vec::len);
        let _ = writeln!(out, "{day},{n}");
    }
    out
}

pub fn emit_counts_csv(partitions: &Partitions, range: &DateRange, path: &Path) -> Result<()> {
    write_file(path, &render_counts_csv(partitions, range))
}

pub fn render_matrix_csv(matrix: &SimilarityMatrix) -> String {
    let mut out = String::from("target");
    for l in &matrix.labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (label, row) in matrix.labels.iter().zip(&matrix.cells) {
        out.push_str(label);
        for &c in row {
            out.push(',');
            out.push_str(&fmt6(c));
        }
        out.push('\n');
    }
    out
}

pub fn emit_matrix_csv(matrix: &SimilarityMatrix, path: &Path) -> Result<()> {
    write_file(path, &render_matrix_csv(matrix))
}

pub fn render_calls_csv(report: &CallReport) -> String {
    let mut out = String::from("scope,method,embedding_calls\n");
    let _ = writeln!(out, "targets,word,{}", report.targets);
    for ((day, method), calls) in &report.per_day {
        let _ = writeln!(out, "{day},{method},{calls}");
    }
    for method in report.methods() {
        let _ = writeln!(out, "total,{method},{}", report.total(method));
    }
    out
}

pub fn emit_calls_csv(report: &CallReport, path: &Path) -> Result<()> {
    write_file(path, &render_calls_csv(report))
}

pub fn emit_trend_svg(scores: &[DailyScore], markers: &[EventMarker], path: &Path) -> Result<()> {
    write_file(path, &render_trend_svg(scores, markers)?)
}

pub fn emit_heatmap_svg(matrix: &SimilarityMatrix, path: &Path) -> Result<()> {
    write_file(path, &render_heatmap_svg(matrix))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn day(s: &str) -> DayKey {
        DayKey::parse(s).unwrap()
    }

    fn score(
        d: &str,
        target: &str,
        method: &'static str,
        s: Option<f64>,
        e: usize,
        c: usize,
    ) -> DailyScore {
        DailyScore {
            day: day(d),
            target: target.into(),
            method,
            score: s,
            items_embedded: e,
            items_considered: c,
        }
    }

    #[test]
    fn scores_csv_row_format() {
        let csv = render_scores_csv(&[score("2020-07-12", "war", "word", Some(0.5), 2, 2)]);
        assert_eq!(
            csv,
            format!("{SCORES_HEADER}\n2020-07-12,war,word,0.500000,2,2,1.000000\n")
        );
        assert_eq!(render_scores_csv(&[]), format!("{SCORES_HEADER}\n"));
    }

    #[test]
    fn scores_csv_sorted_and_empty_fields() {
        let csv = render_scores_csv(&[
            score("2020-07-13", "war", "word", Some(-1e-9), 1, 3),
            score("2020-07-12", "war", "word", None, 0, 4),
            score("2020-07-12", "peace", "word", Some(0.25), 1, 1),
            score("2020-07-12", "peace", "sentence", None, 0, 0),
        ]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[1..],
            [
                "2020-07-12,peace,sentence,,0,0,",
                "2020-07-12,peace,word,0.250000,1,1,1.000000",
                "2020-07-12,war,word,,0,4,0.000000",
                "2020-07-13,war,word,0.000000,1,3,0.333333",
            ]
        );
    }

    #[test]
    fn counts_include_empty_days() {
        use chrono::{TimeZone, Utc};
        let rec = |id: &str, d: u32| crate::ingest::TweetRecord {
            id: id.into(),
            created_at: Utc.with_ymd_and_hms(2020, 7, d, 12, 0, 0).unwrap(),
            lang: "en".into(),
            text: "x".into(),
        };
        let mut parts: Partitions = BTreeMap::new();
        parts.insert(day("2020-07-12"), vec![rec("a", 12), rec("b", 12)]);
        parts.insert(day("2020-07-14"), vec![rec("c", 14)]);
        let range = DateRange::new(day("2020-07-12"), day("2020-07-14")).unwrap();
        assert_eq!(
            render_counts_csv(&parts, &range),
            "date,tweet_count\n2020-07-12,2\n2020-07-13,0\n2020-07-14,1\n"
        );
    }

    #[test]
    fn marker_parsing() {
        let m: EventMarker = "2020-07-12:Border clash: day one:secondary"
            .parse()
            .unwrap();
        assert_eq!(m.date, day("2020-07-12"));
        assert_eq!(m.label, "Border clash: day one");
        assert_eq!(m.style, MarkerStyle::Secondary);
        let q: EventMarker = "\"2020-09-27:war starts:primary\"".parse().unwrap();
        assert_eq!(q.style, MarkerStyle::Primary);
        assert!("2020-07-12:x:tertiary".parse::<EventMarker>().is_err());
        assert!("07/12/2020:x:primary".parse::<EventMarker>().is_err());
    }

    #[test]
    fn matrix_csv() {
        let m = SimilarityMatrix {
            labels: vec!["war".into(), "peace".into()],
            cells: vec![vec![1.0, 0.8], vec![0.8, 1.0]],
        };
        assert_eq!(
            render_matrix_csv(&m),
            "target,war,peace\nwar,1.000000,0.800000\npeace,0.800000,1.000000\n"
        );
    }

    #[test]
    fn unwritable_path_fails() {
        let err = emit_scores_csv(&[], Path::new("/nonexistent/dir/scores.csv")).unwrap_err();
        assert_eq!(err.category(), crate::error::Category::Input);
    }
}
