//! Run results and their summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::events::PhotonPairEvent;
use super::ProtocolConfig;
use crate::optics::{Histogram, IntervalSet};
use crate::stats::{Classification, FeasibilityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Completed,
    /// The requested generative law is not a probability law; nothing sampled.
    Refused,
    /// Outcome hypothesis (iv): no generative content.
    Discontinuity,
    /// Perishable media branch (b).
    IntentAdjustmentRequired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSummary {
    /// Pooled subsets overlap the disjoint ones and are left out of
    /// conservation counts.
    pub pooled: bool,
    pub count: u64,
    pub histogram: Option<Histogram>,
    pub visibility: Option<f64>,
    pub classification: Option<Classification>,
    /// `(weight, phase)` of the interference hypothesis used by the classifier.
    pub wave_hypothesis: Vec<(f64, f64)>,
    /// Set the subset was selected by; both laws are conditioned on it.
    pub region: Option<IntervalSet>,
    /// Fraction of the subset carrying its majority slit tag.
    pub slit_purity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceSummary {
    pub signals: u64,
    pub detector_events: u64,
    pub matched: u64,
    pub unmatched: u64,
    pub ambiguities: u64,
    pub mismatch_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTv {
    pub subset_a: String,
    pub subset_b: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBin {
    /// Bin edges as fractions of the fringe period.
    pub phase_lo: f64,
    pub phase_hi: f64,
    pub count: u64,
    pub recorded: u64,
    pub empirical: Option<f64>,
    /// `∫p / ∫(p + w)` over the folded bin.
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSummary {
    pub bins: Vec<PosteriorBin>,
    pub max_abs_error: f64,
    /// Smallest empirical `P[R=1|bin]` over bins centred where `|cos| < 0.05`.
    pub dark_bin_min: Option<f64>,
    /// Hit rate of "predict R=1 iff posterior > ½".
    pub accuracy: f64,
    /// `(1 + TV) / 2`, the best achievable hit rate if the impact law
    /// depends on R.
    pub reference_accuracy: f64,
    /// Count-weighted mean `|empirical - exact|` over bins.
    pub calibration_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub protocol: super::ProtocolKind,
    pub seed: u64,
    pub outcome: RunOutcome,
    pub pairs_generated: u64,
    /// Pairs left out of every disjoint subset by the coincidence counter.
    pub unmatched: u64,
    pub subsets: BTreeMap<String, SubsetSummary>,
    pub coincidence: Option<CoincidenceSummary>,
    pub empirical_tv: Option<EmpiricalTv>,
    pub predictor: Option<PredictorSummary>,
    pub feasibility: Option<FeasibilityReport>,
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
    pub event_digest: String,
    pub config: ProtocolConfig,
}

impl RunResult {
    pub fn subset(&self, name: &str) -> Option<&SubsetSummary> {
        self.subsets.get(name)
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// Sum of counts over the disjoint (non-pooled) subsets.
    pub fn disjoint_count(&self) -> u64 {
        self.subsets
            .values()
            .filter(|s| !s.pooled)
            .map(|s| s.count)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: RunResult,
    /// One event per generated pair, in pair order.
    pub events: Vec<PhotonPairEvent>,
    /// Impact positions per subset, in pair order.
    pub subset_samples: BTreeMap<String, Vec<f64>>,
}
