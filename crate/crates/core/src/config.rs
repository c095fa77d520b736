//! INI-style run configuration.
//!
//! ```text
//! [input]
//! input = tweets/july.jsonl
//! from = 2020-07-01
//! to = 2020-07-31
//!
//! [targets]
//! target = war
//! target = computer:control
//!
//! [report]
//! marker = "2020-07-12:clashes begin:primary"
//! ```
//!
//! Section headers only group keys; keys are global and match the
//! command-line flag names. `input`, `target` and `marker` may repeat.
//! A key given on the command line replaces every value from the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::clean::HashtagMode;
use crate::embed::{BackendOptions, BackendSpec};
use crate::error::{Error, Result};
use crate::ingest::{DateRange, DayKey};
use crate::report::EventMarker;
use crate::scoring::{validate_targets, ScoreParams, TargetSpec, Weighting, DEFAULT_TOP_N};
use crate::synth::SynthSpec;

pub const KNOWN_KEYS: &[&str] = &[
    "input",
    "from",
    "to",
    "lang",
    "exclude-retweets",
    "target",
    "method",
    "top-n",
    "weighting",
    "strict-denominator",
    "backend",
    "timeout",
    "retries",
    "stopwords",
    "hashtag-mode",
    "marker",
    "out",
    "jobs",
    "seed",
    "spike-baseline",
    "spike-test",
    "start",
    "days",
    "tweets-per-day",
    "vocab-size",
    "dim",
    "spike-cluster",
    "spike-from",
    "spike-to",
    "spike-rate",
    "intra-min",
    "inter-max",
];

const REPEATABLE: &[&str] = &["input", "target", "marker"];

/// Ordered key/value pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: Vec<(String, String)>,
}

fn normalize_key(k: &str) -> String {
    k.trim().to_lowercase().replace('_', "-")
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

impl ConfigMap {
    pub fn new() -> Self {
        ConfigMap::default()
    }

    pub fn parse(text: &str, origin: &Path) -> Result<ConfigMap> {
        let mut map = ConfigMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::Format {
                        path: origin.to_path_buf(),
                        line: i + 1,
                        message: format!("unterminated section header '{line}'"),
                    });
                }
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
                path: origin.to_path_buf(),
                line: i + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            map.push(k, unquote(v));
        }
        map.check_keys()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<ConfigMap> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        ConfigMap::parse(&text, path)
    }

    pub fn push(&mut self, key: &str, value: &str) {
        self.entries
            .push((normalize_key(key), value.trim().to_string()));
    }

    pub fn check_keys(&self) -> Result<()> {
        for (k, _) in &self.entries {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::config(k.clone(), "unknown key"));
            }
        }
        for k in KNOWN_KEYS.iter().filter(|k| !REPEATABLE.contains(k)) {
            if self.all(k).len() > 1 {
                return Err(Error::config(*k, "given more than once"));
            }
        }
        Ok(())
    }

    /// Keys present in `overrides` replace all of this map's values.
    pub fn merged(&self, overrides: &ConfigMap) -> ConfigMap {
        let mut out = ConfigMap::new();
        for (k, v) in &self.entries {
            if !overrides.has(k) {
                out.entries.push((k.clone(), v.clone()));
            }
        }
        out.entries.extend(overrides.entries.iter().cloned());
        out
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _)| k == key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| Error::config(key, "required"))
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| Error::config(key, format!("bad value '{v}': {e}"))),
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("" | "true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => Err(Error::config(
                key,
                format!("expected true or false, got '{v}'"),
            )),
        }
    }

    fn date(&self, key: &str) -> Result<DayKey> {
        let v = self.require(key)?;
        DayKey::parse(v)
            .ok_or_else(|| Error::config(key, format!("'{v}' is not a YYYY-MM-DD date")))
    }

    fn window(&self, key: &str) -> Result<Option<DateRange>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let bad = || Error::config(key, format!("'{v}' is not YYYY-MM-DD:YYYY-MM-DD"));
        let (a, b) = v.split_once(':').ok_or_else(bad)?;
        let a = DayKey::parse(a).ok_or_else(bad)?;
        let b = DayKey::parse(b).ok_or_else(bad)?;
        DateRange::new(a, b).map(Some).map_err(|_| bad())
    }

    /// `key = value` lines in key order, repeatable keys keeping their order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for key in KNOWN_KEYS {
            for v in self.all(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }
}

fn jobs_default() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn positive(map: &ConfigMap, key: &str, default: usize) -> Result<usize> {
    let n: usize = map.parse_or(key, default)?;
    if n == 0 {
        return Err(Error::config(key, "must be at least 1"));
    }
    Ok(n)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub range: DateRange,
    pub lang: String,
    pub exclude_retweets: bool,
    pub targets: Vec<TargetSpec>,
    pub methods: String,
    pub params: ScoreParams,
    pub backend: BackendSpec,
    pub backend_options: BackendOptions,
    pub stopwords: Option<PathBuf>,
    pub hashtag_mode: HashtagMode,
    pub markers: Vec<EventMarker>,
    pub out: PathBuf,
    pub jobs: usize,
    pub spike_windows: Option<(DateRange, DateRange)>,
    /// The merged key/value view this config was built from.
    pub effective: ConfigMap,
}

fn parse_targets(map: &ConfigMap) -> Result<Vec<TargetSpec>> {
    map.all("target").into_iter().map(str::parse).collect()
}

fn parse_backend(map: &ConfigMap) -> Result<(BackendSpec, BackendOptions)> {
    let spec: BackendSpec = map.require("backend")?.parse()?;
    let defaults = BackendOptions::default();
    let timeout: f64 = map.parse_or("timeout", defaults.timeout.as_secs_f64())?;
    if !(timeout > 0.0 && timeout.is_finite()) {
        return Err(Error::config(
            "timeout",
            "must be a positive number of seconds",
        ));
    }
    let retries = map.parse_or("retries", defaults.retries)?;
    Ok((
        spec,
        BackendOptions {
            timeout: Duration::from_secs_f64(timeout),
            retries,
        },
    ))
}

fn parse_range(map: &ConfigMap) -> Result<DateRange> {
    DateRange::new(map.date("from")?, map.date("to")?)
}

fn parse_inputs(map: &ConfigMap) -> Result<Vec<PathBuf>> {
    let inputs: Vec<PathBuf> = map
        .all("input")
        .into_iter()
        .flat_map(|v| v.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .collect();
    if inputs.is_empty() {
        return Err(Error::config(
            "input",
            "at least one input file is required",
        ));
    }
    Ok(inputs)
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<RunConfig> {
        map.check_keys()?;
        let range = parse_range(map)?;
        let targets = parse_targets(map)?;
        validate_targets(&targets, 1)?;
        let (backend, backend_options) = parse_backend(map)?;
        let strict_denominator = map.flag("strict-denominator")?;
        let weighting: Weighting = map.parse_or("weighting", Weighting::Unweighted)?;
        let params = ScoreParams {
            top_n: positive(map, "top-n", DEFAULT_TOP_N)?,
            strict_denominator,
            weighting,
        };
        let markers = map
            .all("marker")
            .into_iter()
            .map(str::parse::<EventMarker>)
            .collect::<Result<Vec<_>>>()?;
        for m in &markers {
            if !range.contains(m.date) {
                return Err(Error::config(
                    "marker",
                    format!("{} is outside the run range {range}", m.date),
                ));
            }
        }
        let spike_windows = match (map.window("spike-baseline")?, map.window("spike-test")?) {
            (Some(b), Some(t)) => Some((b, t)),
            (None, None) => None,
            _ => {
                return Err(Error::config(
                    "spike-baseline",
                    "spike-baseline and spike-test must be given together",
                ))
            }
        };
        let hashtag_mode = match map.get("hashtag-mode") {
            None => HashtagMode::default(),
            Some(v) => v
                .parse()
                .map_err(|e: String| Error::config("hashtag-mode", e))?,
        };
        Ok(RunConfig {
            inputs: parse_inputs(map)?,
            range,
            lang: map.get("lang").unwrap_or("en").to_lowercase(),
            exclude_retweets: map.flag("exclude-retweets")?,
            targets,
            methods: map.get("method").unwrap_or("both").to_string(),
            params,
            backend,
            backend_options,
            stopwords: map.get("stopwords").map(PathBuf::from),
            hashtag_mode,
            markers,
            out: PathBuf::from(map.require("out")?),
            jobs: positive(map, "jobs", jobs_default())?,
            spike_windows,
            effective: map.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TargetsConfig {
    pub targets: Vec<TargetSpec>,
    pub backend: BackendSpec,
    pub backend_options: BackendOptions,
    pub out: PathBuf,
}

impl TargetsConfig {
    pub fn from_map(map: &ConfigMap) -> Result<TargetsConfig> {
        map.check_keys()?;
        let targets = parse_targets(map)?;
        validate_targets(&targets, 2)?;
        let (backend, backend_options) = parse_backend(map)?;
        Ok(TargetsConfig {
            targets,
            backend,
            backend_options,
            out: PathBuf::from(map.require("out")?),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CountsConfig {
    pub inputs: Vec<PathBuf>,
    pub range: DateRange,
    pub lang: String,
    pub exclude_retweets: bool,
    pub out: PathBuf,
}

impl CountsConfig {
    pub fn from_map(map: &ConfigMap) -> Result<CountsConfig> {
        map.check_keys()?;
        Ok(CountsConfig {
            inputs: parse_inputs(map)?,
            range: parse_range(map)?,
            lang: map.get("lang").unwrap_or("en").to_lowercase(),
            exclude_retweets: map.flag("exclude-retweets")?,
            out: PathBuf::from(map.require("out")?),
        })
    }
}

/// Synthetic generation settings; unset keys keep [`SynthSpec::default`].
pub fn synth_spec_from_map(map: &ConfigMap) -> Result<(SynthSpec, PathBuf)> {
    map.check_keys()?;
    let d = SynthSpec::default();
    let mut spec = SynthSpec {
        seed: map.parse_or("seed", d.seed)?,
        start: match map.get("start") {
            Some(_) => map.date("start")?,
            None => d.start,
        },
        days: map.parse_or("days", d.days)?,
        tweets_per_day: map.parse_or("tweets-per-day", d.tweets_per_day)?,
        vocab_size: map.parse_or("vocab-size", d.vocab_size)?,
        dim: map.parse_or("dim", d.dim)?,
        intra_min: map.parse_or("intra-min", d.intra_min)?,
        inter_max: map.parse_or("inter-max", d.inter_max)?,
        ..d.clone()
    };
    if let Some(mut spike) = d.spike {
        if let Some(c) = map.get("spike-cluster") {
            spike.cluster = c.to_string();
        }
        spike.from_day = map.parse_or("spike-from", spike.from_day)?;
        spike.to_day = map.parse_or("spike-to", spike.to_day)?;
        spike.rate = map.parse_or("spike-rate", spike.rate)?;
        spec.spike = if map.get("spike-cluster") == Some("none") {
            None
        } else {
            Some(spike)
        };
    }
    spec.validate()?;
    Ok((spec, PathBuf::from(map.require("out")?)))
}
