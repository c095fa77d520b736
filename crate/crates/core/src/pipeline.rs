//! Command entry points: `run`, `validate-targets`, `counts`, `synth`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::clean::Removals;
use crate::config::{CountsConfig, RunConfig, TargetsConfig};
use crate::embed::{BackendRegistry, CachedBackend, EmbedBackend, EmbedKind};
use crate::error::{Error, Result};
use crate::ingest::{ingest_corpus, partition_by_day, IngestOptions, IngestSummary, Partitions};
use crate::lexical::{DayCorpus, Stopwords};
use crate::report::{self, fmt6, spike_report, SpikeOutcome};
use crate::scoring::{
    embed_targets, score_run, target_similarity_matrix, CallReport, DailyScore, MethodRegistry,
    ScoringMethod, SimilarityMatrix, TargetWord,
};
use crate::synth::{write_synth, SynthSpec};

pub const SCORES_FILE: &str = "scores.csv";
pub const COUNTS_FILE: &str = "counts.csv";
pub const TREND_FILE: &str = "trend.svg";
pub const HEATMAP_FILE: &str = "heatmap.svg";
pub const CALLS_FILE: &str = "calls.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const MATRIX_FILE: &str = "matrix.csv";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const LEXICON_FILE: &str = "lexicon.txt";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scores: Vec<DailyScore>,
    pub calls: CallReport,
    pub matrix: SimilarityMatrix,
    pub ingest: IngestSummary,
    pub removals: Removals,
    pub spikes: Vec<SpikeOutcome>,
    pub files: Vec<PathBuf>,
}

fn create_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)
        .map_err(|e| Error::config("out", format!("cannot create {}: {e}", out.display())))
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))
}

fn write(path: PathBuf, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok(())
}

fn load_stopwords(path: Option<&Path>) -> Result<Stopwords> {
    match path {
        Some(p) => Stopwords::load(p),
        None => Ok(Stopwords::english()),
    }
}

fn ingest(inputs: &[PathBuf], opts: &IngestOptions) -> Result<(Partitions, IngestSummary)> {
    let (records, summary) = ingest_corpus(inputs, opts)?;
    Ok((partition_by_day(records), summary))
}

/// Diagonal-only matrix for a single target.
fn self_matrix(targets: &[TargetWord]) -> Result<SimilarityMatrix> {
    if targets.len() >= 2 {
        return target_similarity_matrix(targets);
    }
    Ok(SimilarityMatrix {
        labels: targets.iter().map(|t| t.label.to_string()).collect(),
        cells: targets.iter().map(|_| vec![1.0]).collect(),
    })
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    run_with(cfg, &BackendRegistry::default(), &MethodRegistry::default())
}

pub fn run_with(
    cfg: &RunConfig,
    backends: &BackendRegistry,
    methods: &MethodRegistry,
) -> Result<RunOutput> {
    let selected = methods.select(&cfg.methods)?;
    create_out_dir(&cfg.out)?;
    let stopwords = load_stopwords(cfg.stopwords.as_deref())?;
    let inner = backends.open(&cfg.backend, &cfg.backend_options)?;
    let pool = thread_pool(cfg.jobs)?;
    pool.install(|| execute(cfg, inner, &selected, &stopwords))
}

fn execute(
    cfg: &RunConfig,
    inner: Arc<dyn EmbedBackend>,
    methods: &[Arc<dyn ScoringMethod>],
    stopwords: &Stopwords,
) -> Result<RunOutput> {
    let opts = IngestOptions {
        range: cfg.range,
        lang: cfg.lang.clone(),
        exclude_retweets: cfg.exclude_retweets,
    };
    let (partitions, ingest_summary) = ingest(&cfg.inputs, &opts)?;

    use rayon::prelude::*;
    let days: Vec<DayCorpus> = partitions
        .par_iter()
        .map(|(day, tweets)| {
            let texts: Vec<&str> = tweets.iter().map(|t| t.text.as_str()).collect();
            DayCorpus::from_texts(*day, &texts, stopwords, cfg.hashtag_mode)
        })
        .collect();
    let mut removals = Removals::default();
    for d in &days {
        removals += d.removals;
    }

    let backend = CachedBackend::new(inner);
    let targets = embed_targets(&cfg.targets, &backend)?;
    let target_calls = backend.calls(EmbedKind::Word);
    let method_refs: Vec<&dyn ScoringMethod> = methods.iter().map(|m| m.as_ref()).collect();
    let (scores, mut calls) = score_run(&days, &targets, &method_refs, &backend, &cfg.params)?;
    calls.targets = target_calls;
    let matrix = self_matrix(&targets)?;

    let mut spikes = Vec::new();
    if let Some((base, test)) = cfg.spike_windows {
        for t in &cfg.targets {
            for m in &method_refs {
                spikes.push(spike_report(
                    &scores,
                    t.label.as_str(),
                    m.name(),
                    base,
                    test,
                )?);
            }
        }
    }

    let out = &cfg.out;
    let mut files = Vec::new();
    write(
        out.join(SCORES_FILE),
        &report::render_scores_csv(&scores),
        &mut files,
    )?;
    write(
        out.join(COUNTS_FILE),
        &report::render_counts_csv(&partitions, &cfg.range),
        &mut files,
    )?;
    if scores.iter().any(|s| !s.is_empty()) {
        write(
            out.join(TREND_FILE),
            &report::render_trend_svg(&scores, &cfg.markers)?,
            &mut files,
        )?;
    }
    write(
        out.join(HEATMAP_FILE),
        &report::render_heatmap_svg(&matrix),
        &mut files,
    )?;
    write(
        out.join(CALLS_FILE),
        &report::render_calls_csv(&calls),
        &mut files,
    )?;

    let mut output = RunOutput {
        scores,
        calls,
        matrix,
        ingest: ingest_summary,
        removals,
        spikes,
        files,
    };
    let summary = render_summary(cfg, backend.inner().describe().as_str(), &output);
    let mut files = std::mem::take(&mut output.files);
    write(out.join(SUMMARY_FILE), &summary, &mut files)?;
    output.files = files;
    Ok(output)
}

fn render_summary(cfg: &RunConfig, backend: &str, out: &RunOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# effective configuration");
    s.push_str(&cfg.effective.render());
    let _ = writeln!(s, "jobs = {}", cfg.jobs);
    let _ = writeln!(s, "\n# backend\n{backend}");

    let ing = &out.ingest;
    let _ = writeln!(s, "\n# ingestion");
    let _ = writeln!(s, "lines: {}", ing.total_lines);
    let _ = writeln!(s, "accepted: {}", ing.accepted);
    let _ = writeln!(s, "duplicates: {}", ing.duplicates);
    for (reason, n) in &ing.skipped {
        let _ = writeln!(s, "skipped {}: {n}", reason.as_str());
    }

    let r = &out.removals;
    let _ = writeln!(s, "\n# cleaning");
    let _ = writeln!(
        s,
        "removed: url {} mention {} hashtag {} emoji {} control {}",
        r.url, r.mention, r.hashtag, r.emoji, r.control
    );

    let _ = writeln!(s, "\n# coverage");
    for d in &out.scores {
        let cov = d.coverage().map(fmt6).unwrap_or_else(|| "-".into());
        let score = d.score.map(fmt6).unwrap_or_else(|| "EMPTY".into());
        let _ = writeln!(
            s,
            "{} {} {}: score {score} embedded {}/{} coverage {cov}",
            d.day, d.target, d.method, d.items_embedded, d.items_considered
        );
    }

    let _ = writeln!(s, "\n# embedding calls");
    let _ = writeln!(s, "targets: {}", out.calls.targets);
    for m in out.calls.methods() {
        let _ = writeln!(s, "{m}: {}", out.calls.total(m));
    }

    if !out.spikes.is_empty() {
        let _ = writeln!(s, "\n# spikes");
        for sp in &out.spikes {
            match sp {
                SpikeOutcome::Report(r) => {
                    let z = r.z.map(fmt6).unwrap_or_else(|| "undefined".into());
                    let _ = writeln!(
                        s,
                        "{} {}: baseline {} mean {} std {}, test {} mean {}, z {z}",
                        r.target,
                        r.method,
                        r.baseline_window,
                        fmt6(r.baseline_mean),
                        fmt6(r.baseline_std),
                        r.test_window,
                        fmt6(r.test_mean)
                    );
                }
                SpikeOutcome::Insufficient { baseline, test } => {
                    let _ = writeln!(
                        s,
                        "INSUFFICIENT: {baseline} baseline and {test} test scores"
                    );
                }
            }
        }
    }
    s
}

pub fn validate_targets(cfg: &TargetsConfig) -> Result<SimilarityMatrix> {
    validate_targets_with(cfg, &BackendRegistry::default())
}

pub fn validate_targets_with(
    cfg: &TargetsConfig,
    backends: &BackendRegistry,
) -> Result<SimilarityMatrix> {
    create_out_dir(&cfg.out)?;
    let backend = backends.open(&cfg.backend, &cfg.backend_options)?;
    let targets = embed_targets(&cfg.targets, backend.as_ref())?;
    let matrix = target_similarity_matrix(&targets)?;
    let mut files = Vec::new();
    write(
        cfg.out.join(HEATMAP_FILE),
        &report::render_heatmap_svg(&matrix),
        &mut files,
    )?;
    write(
        cfg.out.join(MATRIX_FILE),
        &report::render_matrix_csv(&matrix),
        &mut files,
    )?;
    Ok(matrix)
}

pub fn counts(cfg: &CountsConfig) -> Result<IngestSummary> {
    create_out_dir(&cfg.out)?;
    let opts = IngestOptions {
        range: cfg.range,
        lang: cfg.lang.clone(),
        exclude_retweets: cfg.exclude_retweets,
    };
    let (partitions, summary) = ingest(&cfg.inputs, &opts)?;
    let mut files = Vec::new();
    write(
        cfg.out.join(COUNTS_FILE),
        &report::render_counts_csv(&partitions, &cfg.range),
        &mut files,
    )?;
    Ok(summary)
}

/// Writes `corpus.jsonl` and `lexicon.txt` under `out`.
pub fn synth(spec: &SynthSpec, out: &Path) -> Result<(PathBuf, PathBuf)> {
    create_out_dir(out)?;
    let corpus = out.join(CORPUS_FILE);
    let lexicon = out.join(LEXICON_FILE);
    write_synth(spec, &corpus, &lexicon)?;
    Ok((corpus, lexicon))
}
