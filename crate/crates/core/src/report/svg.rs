use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{fmt6, EventMarker, MarkerStyle};
use crate::error::{Error, Result};
use crate::ingest::DayKey;
use crate::scoring::{DailyScore, SimilarityMatrix};

pub const TREND_WIDTH: f64 = 960.0;
pub const TREND_HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct XScale {
    first: DayKey,
    span_days: f64,
}

impl XScale {
    fn x(&self, day: DayKey) -> f64 {
        let plot_w = TREND_WIDTH - LEFT - RIGHT;
        if self.span_days == 0.0 {
            return LEFT + plot_w / 2.0;
        }
        let offset = (day.0 - self.first.0).num_days() as f64;
        LEFT + plot_w * offset / self.span_days
    }
}

struct YScale {
    lo: f64,
    hi: f64,
}

impl YScale {
    fn y(&self, v: f64) -> f64 {
        let plot_h = TREND_HEIGHT - TOP - BOTTOM;
        TOP + plot_h * (self.hi - v) / (self.hi - self.lo)
    }
}

/// Line chart of daily scores, one polyline per (target, method), with a
/// dashed vertical line for every marker inside the plotted date span.
pub fn render_trend_svg(scores: &[DailyScore], markers: &[EventMarker]) -> Result<String> {
    let mut series: BTreeMap<(&str, &str), Vec<(DayKey, f64)>> = BTreeMap::new();
    for s in scores {
        let entry = series.entry((s.target.as_str(), s.method)).or_default();
        if let Some(v) = s.score {
            entry.push((s.day, v));
        }
    }
    series.retain(|_, pts| !pts.is_empty());
    if series.is_empty() {
        return Err(Error::Invalid(
            "trend plot needs at least one non-empty score".into(),
        ));
    }
    for pts in series.values_mut() {
        pts.sort_by_key(|(d, _)| *d);
    }

    let first = scores.iter().map(|s| s.day).min().expect("non-empty");
    let last = scores.iter().map(|s| s.day).max().expect("non-empty");
    let xs = XScale {
        first,
        span_days: (last.0 - first.0).num_days() as f64,
    };
    let values = series.values().flatten().map(|&(_, v)| v);
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.05 };
    lo -= pad;
    hi += pad;
    let ys = YScale { lo, hi };

    let plot_right = TREND_WIDTH - RIGHT;
    let plot_bottom = TREND_HEIGHT - BOTTOM;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{TREND_WIDTH}" height="{TREND_HEIGHT}" viewBox="0 0 {TREND_WIDTH} {TREND_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{TREND_WIDTH}" height="{TREND_HEIGHT}" fill="white"/>"#
    );

    // axes
    let _ = writeln!(out, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{plot_bottom}" x2="{plot_right}" y2="{plot_bottom}"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{plot_bottom}"/>"#
    );
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="y-ticks" text-anchor="end">"#);
    for i in 0..=5 {
        let v = ys.lo + (ys.hi - ys.lo) * i as f64 / 5.0;
        let y = ys.y(v);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}">{:.3}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            v
        );
    }
    let _ = writeln!(out, "</g>");

    let span = xs.span_days as i64;
    let step = (span / 8).max(1);
    let _ = writeln!(out, r#"<g class="x-ticks" text-anchor="middle">"#);
    let mut d = 0i64;
    while d <= span {
        let day = DayKey(first.0 + chrono::Days::new(d as u64));
        let x = xs.x(day);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{plot_bottom}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}">{day}</text>"#,
            plot_bottom + 5.0,
            plot_bottom + 20.0
        );
        d += step;
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">date</text>"#,
        LEFT + (plot_right - LEFT) / 2.0,
        TREND_HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text class="y-label" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">mean similarity score</text>"#,
        TOP + (plot_bottom - TOP) / 2.0,
        TOP + (plot_bottom - TOP) / 2.0
    );

    let _ = writeln!(out, r#"<g class="markers">"#);
    for m in markers {
        if m.date < first || m.date > last {
            continue;
        }
        let x = xs.x(m.date);
        let (class, color) = match m.style {
            MarkerStyle::Primary => ("marker primary", "#1f3fbf"),
            MarkerStyle::Secondary => ("marker secondary", "#d62728"),
        };
        let _ = writeln!(
            out,
            r#"<line class="{class}" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{plot_bottom}" stroke="{color}" stroke-width="1.5" stroke-dasharray="6,4"/><text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            x + 3.0,
            TOP + 12.0,
            escape(&m.label)
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="series" fill="none" stroke-width="2">"#);
    for (i, ((target, method), pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if *method == "sentence" {
            r#" stroke-dasharray="2,2""#
        } else {
            ""
        };
        let points: Vec<String> = pts
            .iter()
            .map(|&(d, v)| format!("{:.2},{:.2}", xs.x(d), ys.y(v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline data-target="{}" data-method="{}" stroke="{color}"{dash} points="{}"/>"#,
            escape(target),
            escape(method),
            points.join(" ")
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="legend">"#);
    for (i, (target, method)) in series.keys().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = plot_right + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{} ({})</text>"#,
            x + 20.0,
            x + 26.0,
            y + 4.0,
            escape(target),
            escape(method)
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

const CELL: f64 = 64.0;
const LABEL_SPACE: f64 = 110.0;

/// Fill colour for a cosine in [-1, 1]: white at -1 to dark blue at 1, each
/// channel non-increasing in the value.
pub fn heat_color(v: f64) -> (u8, u8, u8) {
    let t = ((v.clamp(-1.0, 1.0) + 1.0) / 2.0).clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (lerp(255.0, 8.0), lerp(255.0, 48.0), lerp(255.0, 107.0))
}

pub fn render_heatmap_svg(matrix: &SimilarityMatrix) -> String {
    let k = matrix.size() as f64;
    let w = LABEL_SPACE + CELL * k + 20.0;
    let h = LABEL_SPACE + CELL * k + 20.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );

    let _ = writeln!(out, r#"<g class="col-labels" text-anchor="start">"#);
    for (j, label) in matrix.labels.iter().enumerate() {
        let x = LABEL_SPACE + CELL * j as f64 + CELL / 2.0;
        let y = LABEL_SPACE - 8.0;
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" transform="rotate(-45 {x:.2} {y:.2})">{}</text>"#,
            escape(label)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="row-labels" text-anchor="end">"#);
    for (i, label) in matrix.labels.iter().enumerate() {
        let y = LABEL_SPACE + CELL * i as f64 + CELL / 2.0 + 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}">{}</text>"#,
            LABEL_SPACE - 8.0,
            escape(label)
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="cells">"#);
    for (i, row) in matrix.cells.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let (r, g, b) = heat_color(v);
            let x = LABEL_SPACE + CELL * j as f64;
            let y = LABEL_SPACE + CELL * i as f64;
            let text_color = if (v + 1.0) / 2.0 > 0.6 {
                "white"
            } else {
                "black"
            };
            let _ = writeln!(
                out,
                r##"<rect class="cell" data-row="{i}" data-col="{j}" data-value="{}" x="{x:.2}" y="{y:.2}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{b:02x}" stroke="white"/><text x="{:.2}" y="{:.2}" text-anchor="middle" fill="{text_color}">{:.2}</text>"##,
                fmt6(v),
                x + CELL / 2.0,
                y + CELL / 2.0 + 4.0,
                v
            );
        }
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
