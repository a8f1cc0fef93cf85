//! Time-tag coincidence matching between screen impacts and idler detectors.

use serde::{Deserialize, Serialize};

use super::events::Detector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalEvent {
    pub pair_id: u64,
    pub time: f64,
}

/// An idler click. Carries no pair id: the counter only sees times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorEvent {
    pub time: f64,
    pub detector: Detector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRecord {
    pub pair_id: u64,
    pub signal_time: f64,
    pub detector_time: Option<f64>,
    pub detector: Option<Detector>,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoincidenceOutcome {
    /// One record per signal event, in input order.
    pub records: Vec<CoincidenceRecord>,
    /// Signals that saw more than one unused candidate inside the window.
    pub ambiguities: usize,
}

impl CoincidenceOutcome {
    pub fn matched(&self) -> usize {
        self.records.iter().filter(|r| r.matched).count()
    }
}

/// Greedy nearest-in-time matching. A detector event at `t_d` is a candidate
/// for a signal at `t_s` when `|t_d - t_s - delay| < window`. Both streams
/// must be sorted by time.
pub fn coincidence_match(
    signals: &[SignalEvent],
    detectors: &[DetectorEvent],
    delay_s: f64,
    window_s: f64,
) -> CoincidenceOutcome {
    let mut used = vec![false; detectors.len()];
    let mut start = 0usize;
    let mut ambiguities = 0;
    let mut records = Vec::with_capacity(signals.len());

    for s in signals {
        let expected = s.time + delay_s;
        while start < detectors.len() && detectors[start].time <= expected - window_s {
            start += 1;
        }
        let mut best: Option<(usize, f64)> = None;
        let mut candidates = 0;
        let mut k = start;
        while k < detectors.len() && detectors[k].time < expected + window_s {
            let off = (detectors[k].time - expected).abs();
            if !used[k] && off < window_s {
                candidates += 1;
                if best.is_none_or(|(_, b)| off < b) {
                    best = Some((k, off));
                }
            }
            k += 1;
        }
        if candidates > 1 {
            ambiguities += 1;
        }
        records.push(match best {
            Some((k, _)) => {
                used[k] = true;
                CoincidenceRecord {
                    pair_id: s.pair_id,
                    signal_time: s.time,
                    detector_time: Some(detectors[k].time),
                    detector: Some(detectors[k].detector),
                    matched: true,
                }
            }
            None => CoincidenceRecord {
                pair_id: s.pair_id,
                signal_time: s.time,
                detector_time: None,
                detector: None,
                matched: false,
            },
        });
    }
    CoincidenceOutcome {
        records,
        ambiguities,
    }
}
