use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn trendsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trendsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sha(path: &Path) -> String {
    format!("{:x}", Sha256::digest(fs::read(path).unwrap()))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, extra: &[&str]) {
    let out = dir.to_str().unwrap();
    let mut args = vec!["synth", "--out", out];
    args.extend_from_slice(extra);
    let o = trendsim(&args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn synth_checksums_are_frozen() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), &[]);
    assert_eq!(
        sha(&dir.path().join("corpus.jsonl")),
        "248e6ac9c905597967005715ea74c622d876cd09e35ee26faf4d83d15e71321e"
    );
    assert_eq!(
        sha(&dir.path().join("lexicon.txt")),
        "c4ba6fd3a6d144957ded9845e8fa5cacc2f1e7570cc3e79651fbba39f69fe207"
    );

    let other = tempfile::tempdir().unwrap();
    synth(other.path(), &["--seed", "43"]);
    assert_ne!(
        sha(&other.path().join("corpus.jsonl")),
        sha(&dir.path().join("corpus.jsonl"))
    );
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        synth(
            &dir.path().join("syn"),
            &["--days", "20", "--tweets-per-day", "60"],
        );
        Fixture { dir }
    }

    fn path(&self, p: &str) -> String {
        self.dir.path().join(p).to_str().unwrap().to_string()
    }

    /// Flags in `extra` replace defaults of the same name; repeatable ones add.
    fn run(&self, out: &str, extra: &[&str]) -> Output {
        let mut flags: Vec<(String, String)> = vec![
            ("--input".into(), self.path("syn/corpus.jsonl")),
            ("--from".into(), "2020-07-01".into()),
            ("--to".into(), "2020-07-20".into()),
            ("--target".into(), "war".into()),
            ("--target".into(), "peace".into()),
            ("--target".into(), "computer:control".into()),
            (
                "--backend".into(),
                format!("lexicon:{}", self.path("syn/lexicon.txt")),
            ),
            ("--out".into(), self.path(out)),
            ("--top-n".into(), "50".into()),
        ];
        let mut args = vec!["run".to_string()];
        for pair in extra.chunks(2) {
            let (k, v) = (pair[0], pair.get(1).copied().unwrap_or_default());
            if !matches!(k, "--target" | "--marker") {
                flags.retain(|(f, _)| f != k);
            }
            flags.push((k.to_string(), v.to_string()));
        }
        for (k, v) in flags {
            args.push(k);
            args.push(v);
        }
        Command::new(env!("CARGO_BIN_EXE_trendsim"))
            .args(&args)
            .output()
            .expect("binary runs")
    }
}

#[test]
fn run_writes_all_outputs() {
    let f = Fixture::new();
    let o = f.run("out", &["--marker", "2020-07-10:spike begins:primary"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in [
        "scores.csv",
        "counts.csv",
        "trend.svg",
        "heatmap.svg",
        "calls.csv",
        "summary.txt",
    ] {
        assert!(f.dir.path().join("out").join(name).exists(), "{name}");
    }
    let scores = fs::read_to_string(f.path("out/scores.csv")).unwrap();
    // 20 days x 3 targets x 2 methods
    assert_eq!(scores.lines().count(), 1 + 120);

    let svg = fs::read_to_string(f.path("out/trend.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let lines: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .collect();
    assert_eq!(lines.len(), 6);
    for l in &lines {
        assert_eq!(
            l.attribute("points").unwrap().split_whitespace().count(),
            20
        );
    }
    assert!(svg.contains("spike begins"));

    let calls = fs::read_to_string(f.path("out/calls.csv")).unwrap();
    assert!(calls.starts_with("scope,method,embedding_calls\ntargets,word,3\n"));
}

#[test]
fn empty_days_leave_gaps() {
    let f = Fixture::new();
    let o = f.run("gap", &["--to", "2020-07-25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let counts = fs::read_to_string(f.path("gap/counts.csv")).unwrap();
    assert_eq!(counts.lines().count(), 1 + 25);
    assert!(counts.ends_with("2020-07-25,0\n"));
    let scores = fs::read_to_string(f.path("gap/scores.csv")).unwrap();
    assert!(!scores.contains("2020-07-21"));
}

#[test]
fn config_file_with_flag_override() {
    let f = Fixture::new();
    let cfg = format!(
        "[input]\ninput = {}\nfrom = 2020-07-01\nto = 2020-07-20\n\n[targets]\ntarget = war\ntarget = computer:control\n\n[run]\nbackend = lexicon:{}\nmethod = word\ntop_n = 20\nout = {}\n",
        f.path("syn/corpus.jsonl"),
        f.path("syn/lexicon.txt"),
        f.path("cfg-out")
    );
    fs::write(f.path("run.ini"), cfg).unwrap();
    let ini = f.path("run.ini");
    let o = trendsim(&["run", "--config", &ini, "--method", "sentence"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let scores = fs::read_to_string(f.path("cfg-out/scores.csv")).unwrap();
    assert!(scores.lines().skip(1).all(|l| l.contains(",sentence,")));
    let summary = fs::read_to_string(f.path("cfg-out/summary.txt")).unwrap();
    assert!(summary.contains("method = sentence"));
    assert!(summary.contains("top-n = 20"));
}

#[test]
fn exit_codes() {
    let f = Fixture::new();

    let o = f.run("bad", &["--top-n", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("top-n"));

    let o = f.run("bad", &["--target", "zzzunknownword"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let o = trendsim(&["run", "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);

    let missing = f.path("nope.txt");
    let o = f.run("bad", &["--backend", &format!("lexicon:{missing}")]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = f.run("bad", &["--input", &missing]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = f.run(
        "bad",
        &[
            "--backend",
            "service:http://127.0.0.1:9",
            "--retries",
            "0",
            "--timeout",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn validate_targets_writes_matrix() {
    let f = Fixture::new();
    let backend = format!("lexicon:{}", f.path("syn/lexicon.txt"));
    let out = f.path("vt");
    let o = trendsim(&[
        "validate-targets",
        "--target",
        "war",
        "--target",
        "peace",
        "--target",
        "computer",
        "--backend",
        &backend,
        "--out",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(f.path("vt/matrix.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            assert_eq!(*cell, rows[j][i]);
        }
    }
    assert!(rows[0][1] > rows[0][2] && rows[0][1] > rows[1][2]);
    assert!(f.dir.path().join("vt/heatmap.svg").exists());

    let o = trendsim(&[
        "validate-targets",
        "--target",
        "war",
        "--backend",
        &backend,
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn counts_subcommand() {
    let f = Fixture::new();
    let input = f.path("syn/corpus.jsonl");
    let out = f.path("counts");
    let o = trendsim(&[
        "counts",
        "--input",
        &input,
        "--from",
        "2020-07-01",
        "--to",
        "2020-07-20",
        "--out",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(f.path("counts/counts.csv")).unwrap();
    let total: usize = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 1200);
    assert!(String::from_utf8_lossy(&o.stdout).contains("1200 accepted"));
}
