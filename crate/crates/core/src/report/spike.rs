use crate::error::{Error, Result};
use crate::ingest::DateRange;
use crate::scoring::DailyScore;

pub const MIN_WINDOW_SCORES: usize = 3;

/// Two-window comparison of one target's daily scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeReport {
    pub target: String,
    pub method: String,
    pub baseline_window: DateRange,
    pub test_window: DateRange,
    pub baseline_mean: f64,
    /// Sample (n - 1) standard deviation.
    pub baseline_std: f64,
    pub test_mean: f64,
    /// `None` when the baseline has no spread.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpikeOutcome {
    Report(SpikeReport),
    Insufficient { baseline: usize, test: usize },
}

impl SpikeOutcome {
    pub fn report(&self) -> Option<&SpikeReport> {
        match self {
            SpikeOutcome::Report(r) => Some(r),
            SpikeOutcome::Insufficient { .. } => None,
        }
    }

    pub fn z(&self) -> Option<f64> {
        self.report().and_then(|r| r.z)
    }
}

fn window_scores(scores: &[DailyScore], target: &str, method: &str, w: &DateRange) -> Vec<f64> {
    scores
        .iter()
        .filter(|s| s.target == target && s.method == method && w.contains(s.day))
        .filter_map(|s| s.score)
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64], m: f64) -> f64 {
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn spike_report(
    scores: &[DailyScore],
    target: &str,
    method: &str,
    baseline: DateRange,
    test: DateRange,
) -> Result<SpikeOutcome> {
    if baseline.start <= test.end && test.start <= baseline.end {
        return Err(Error::Invalid(format!(
            "spike windows overlap: baseline {baseline}, test {test}"
        )));
    }
    let base = window_scores(scores, target, method, &baseline);
    let tst = window_scores(scores, target, method, &test);
    if base.len() < MIN_WINDOW_SCORES || tst.len() < MIN_WINDOW_SCORES {
        return Ok(SpikeOutcome::Insufficient {
            baseline: base.len(),
            test: tst.len(),
        });
    }
    let baseline_mean = mean(&base);
    let baseline_std = sample_std(&base, baseline_mean);
    let test_mean = mean(&tst);
    // Rounding noise from identical scores is not spread.
    let z = (baseline_std > 1e-12 * baseline_mean.abs().max(1.0))
        .then(|| (test_mean - baseline_mean) / baseline_std);
    Ok(SpikeOutcome::Report(SpikeReport {
        target: target.to_string(),
        method: method.to_string(),
        baseline_window: baseline,
        test_window: test,
        baseline_mean,
        baseline_std,
        test_mean,
        z,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DayKey;

    fn series(values: &[f64]) -> Vec<DailyScore> {
        let start = DayKey::parse("2020-07-01").unwrap();
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| DailyScore {
                day: DayKey(start.0 + chrono::Days::new(i as u64)),
                target: "war".into(),
                method: "word",
                score: Some(v),
                items_embedded: 1,
                items_considered: 1,
            })
            .collect()
    }

    fn window(a: &str, b: &str) -> DateRange {
        DateRange::new(DayKey::parse(a).unwrap(), DayKey::parse(b).unwrap()).unwrap()
    }

    #[test]
    fn zero_spread_baseline_has_no_z() {
        let s = series(&[0.2, 0.2, 0.2, 0.5, 0.5, 0.5]);
        let out = spike_report(
            &s,
            "war",
            "word",
            window("2020-07-01", "2020-07-03"),
            window("2020-07-04", "2020-07-06"),
        )
        .unwrap();
        let r = out.report().unwrap();
        assert!(r.z.is_none());
    }

    #[test]
    fn hand_computed_z() {
        let s = series(&[0.1, 0.2, 0.3, 0.5, 0.6, 0.7]);
        let out = spike_report(
            &s,
            "war",
            "word",
            window("2020-07-01", "2020-07-03"),
            window("2020-07-04", "2020-07-06"),
        )
        .unwrap();
        // sample std of {0.1, 0.2, 0.3} is 0.1
        let z = out.z().unwrap();
        assert!((z - (0.6 - 0.2) / 0.1).abs() < 1e-9, "z = {z}");
    }

    #[test]
    fn insufficient_and_overlap() {
        let s = series(&[0.1, 0.2, 0.3, 0.5]);
        let out = spike_report(
            &s,
            "war",
            "word",
            window("2020-07-01", "2020-07-03"),
            window("2020-07-04", "2020-07-06"),
        )
        .unwrap();
        assert_eq!(
            out,
            SpikeOutcome::Insufficient {
                baseline: 3,
                test: 1
            }
        );
        assert!(spike_report(
            &s,
            "war",
            "word",
            window("2020-07-01", "2020-07-04"),
            window("2020-07-04", "2020-07-06")
        )
        .is_err());
    }
}
