use std::collections::BTreeMap;

use crate::ingest::DayKey;

/// Embedding invocations (cache misses) attributed to the step that caused
/// them: target embedding once per run, then each (day, method).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallReport {
    pub targets: u64,
    pub per_day: BTreeMap<(DayKey, &'static str), u64>,
}

impl CallReport {
    pub fn record(&mut self, day: DayKey, method: &'static str, calls: u64) {
        *self.per_day.entry((day, method)).or_default() += calls;
    }

    pub fn get(&self, day: DayKey, method: &str) -> u64 {
        self.per_day
            .iter()
            .find(|((d, m), _)| *d == day && *m == method)
            .map(|(_, c)| *c)
            .unwrap_or(0)
    }

    pub fn total(&self, method: &str) -> u64 {
        self.per_day
            .iter()
            .filter(|((_, m), _)| *m == method)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn methods(&self) -> Vec<&'static str> {
        let mut m: Vec<_> = self.per_day.keys().map(|(_, m)| *m).collect();
        m.sort_unstable();
        m.dedup();
        m
    }
}
