use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trendsim_core::config::{
    synth_spec_from_map, ConfigMap, CountsConfig, RunConfig, TargetsConfig,
};
use trendsim_core::{pipeline, Category, Error, Result};

#[derive(Parser)]
#[command(
    name = "trendsim",
    version,
    about = "Daily mean similarity trends over tweet corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every day of a corpus against the target words.
    Run(Flags),
    /// Embed the targets and write their similarity matrix.
    ValidateTargets(Flags),
    /// Generate a synthetic corpus and lexicon.
    Synth(Flags),
    /// Write per-day tweet counts.
    Counts(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// INI-style file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSONL tweet file (repeatable).
    #[arg(long)]
    input: Vec<String>,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    lang: Option<String>,
    #[arg(long)]
    exclude_retweets: bool,
    /// label[:control] (repeatable).
    #[arg(long)]
    target: Vec<String>,
    /// word, sentence or both.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    top_n: Option<String>,
    /// unweighted or frequency.
    #[arg(long)]
    weighting: Option<String>,
    /// Divide by the nominal unit count rather than the embedded count.
    #[arg(long)]
    strict_denominator: bool,
    /// lexicon:<path> or service:<url>.
    #[arg(long)]
    backend: Option<String>,
    /// Service timeout in seconds.
    #[arg(long)]
    timeout: Option<String>,
    #[arg(long)]
    retries: Option<String>,
    #[arg(long)]
    stopwords: Option<String>,
    /// remove or strip-marker.
    #[arg(long)]
    hashtag_mode: Option<String>,
    /// YYYY-MM-DD:label:primary|secondary (repeatable).
    #[arg(long)]
    marker: Vec<String>,
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; defaults to the number of processors.
    #[arg(long)]
    jobs: Option<String>,
    /// YYYY-MM-DD:YYYY-MM-DD
    #[arg(long)]
    spike_baseline: Option<String>,
    /// YYYY-MM-DD:YYYY-MM-DD
    #[arg(long)]
    spike_test: Option<String>,

    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    days: Option<String>,
    #[arg(long)]
    tweets_per_day: Option<String>,
    #[arg(long)]
    vocab_size: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    spike_cluster: Option<String>,
    #[arg(long)]
    spike_from: Option<String>,
    #[arg(long)]
    spike_to: Option<String>,
    #[arg(long)]
    spike_rate: Option<String>,
    #[arg(long)]
    intra_min: Option<String>,
    #[arg(long)]
    inter_max: Option<String>,
}

impl Flags {
    fn to_map(&self) -> ConfigMap {
        let mut m = ConfigMap::new();
        let many = [
            ("input", &self.input),
            ("target", &self.target),
            ("marker", &self.marker),
        ];
        for (k, vs) in many {
            for v in vs {
                m.push(k, v);
            }
        }
        let single = [
            ("from", &self.from),
            ("to", &self.to),
            ("lang", &self.lang),
            ("method", &self.method),
            ("top-n", &self.top_n),
            ("weighting", &self.weighting),
            ("backend", &self.backend),
            ("timeout", &self.timeout),
            ("retries", &self.retries),
            ("stopwords", &self.stopwords),
            ("hashtag-mode", &self.hashtag_mode),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("spike-baseline", &self.spike_baseline),
            ("spike-test", &self.spike_test),
            ("seed", &self.seed),
            ("start", &self.start),
            ("days", &self.days),
            ("tweets-per-day", &self.tweets_per_day),
            ("vocab-size", &self.vocab_size),
            ("dim", &self.dim),
            ("spike-cluster", &self.spike_cluster),
            ("spike-from", &self.spike_from),
            ("spike-to", &self.spike_to),
            ("spike-rate", &self.spike_rate),
            ("intra-min", &self.intra_min),
            ("inter-max", &self.inter_max),
        ];
        for (k, v) in single {
            if let Some(v) = v {
                m.push(k, v);
            }
        }
        if self.strict_denominator {
            m.push("strict-denominator", "true");
        }
        if self.exclude_retweets {
            m.push("exclude-retweets", "true");
        }
        m
    }

    fn resolve(&self) -> Result<ConfigMap> {
        let flags = self.to_map();
        let merged = match &self.config {
            Some(path) => ConfigMap::load(path)?.merged(&flags),
            None => flags,
        };
        merged.check_keys()?;
        Ok(merged)
    }
}

fn show(path: &Path) -> String {
    path.display().to_string()
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(f) => {
            let cfg = RunConfig::from_map(&f.resolve()?)?;
            let out = pipeline::run(&cfg)?;
            let empty = out.scores.iter().filter(|s| s.is_empty()).count();
            println!(
                "scored {} day/target/method records ({} empty) from {} tweets",
                out.scores.len(),
                empty,
                out.ingest.accepted
            );
            for p in &out.files {
                println!("wrote {}", show(p));
            }
        }
        Command::ValidateTargets(f) => {
            let cfg = TargetsConfig::from_map(&f.resolve()?)?;
            let m = pipeline::validate_targets(&cfg)?;
            for (label, row) in m.labels.iter().zip(&m.cells) {
                let cells: Vec<String> = row.iter().map(|c| format!("{c:.3}")).collect();
                println!("{label}: {}", cells.join(" "));
            }
            println!("wrote {}", show(&cfg.out));
        }
        Command::Synth(f) => {
            let (spec, out) = synth_spec_from_map(&f.resolve()?)?;
            let (corpus, lexicon) = pipeline::synth(&spec, &out)?;
            println!("wrote {}", show(&corpus));
            println!("wrote {}", show(&lexicon));
        }
        Command::Counts(f) => {
            let cfg = CountsConfig::from_map(&f.resolve()?)?;
            let s = pipeline::counts(&cfg)?;
            println!(
                "{} lines, {} accepted, {} skipped, {} duplicates",
                s.total_lines,
                s.accepted,
                s.total_skipped(),
                s.duplicates
            );
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        Category::Config => 1,
        Category::Input => 2,
        Category::Backend => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("trendsim: {}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trendsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
