//! Executable experiment protocols.
//!
//! Each protocol generates one event per entangled pair, renders the screen
//! impact through the configured [`RenderingModel`], sorts impacts into
//! subsets and summarizes them. Pair `i` is created at `1.5·i·Δt`, so only
//! one pair is ever in flight.

mod availability;
mod baseline;
pub mod coincidence;
mod engine;
pub mod events;
mod predictor;
pub mod result;
mod switch;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::models::RenderingModel;
use crate::optics::{IntervalSet, OpticsConfig};
use crate::stats::{default_llr_threshold, DEFAULT_NOISE_THRESHOLD};

pub use coincidence::{
    coincidence_match, CoincidenceOutcome, CoincidenceRecord, DetectorEvent, SignalEvent,
};
pub use events::{
    event_digest, write_event_csv, Detector, PhotonPairEvent, Slit, Splitter, SplitterDecision,
    SplitterOutcome, EVENT_LOG_HEADER,
};
pub use result::{
    CoincidenceSummary, EmpiricalTv, PosteriorBin, PredictorSummary, RunOutcome, RunOutput,
    RunResult, SubsetSummary,
};

/// Short Δt preset, seconds.
pub const SHORT_DELTA_T_S: f64 = 1e-8;
/// Long Δt preset, seconds.
pub const LONG_DELTA_T_S: f64 = 60.0;
/// Default perishable-media lifetime, seconds.
pub const DEFAULT_PERISHABLE_TTL_S: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    DoubleSlit,
    DelayedChoice,
    QuantumEraser,
    DetectNoRecord,
    MacroscopicErasure,
    PredictorExperiment,
    SwitchParadox,
    PerishableMedia,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    #[default]
    IndependentCoinFlips,
    /// Destroy a uniformly random subset of exactly half the pairs.
    ExactHalfSubset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeHypothesis {
    /// Interference when the switch is off, particle when it is on.
    #[serde(rename = "i")]
    I,
    /// Always particle.
    #[serde(rename = "ii")]
    Ii,
    /// Always interference.
    #[serde(rename = "iii")]
    Iii,
    /// None of the above.
    #[serde(rename = "iv")]
    Iv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationSchedule {
    /// The impact is looked at as soon as it happens.
    AtT0,
    /// The impact is looked at after the idler's fate is settled.
    #[default]
    AfterDeltaT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectNoRecordVariant {
    /// Detectors at the slits, recording device unplugged.
    #[default]
    SlitDetectors,
    /// Eraser setup with the coincidence counter removed.
    CounterRemoved,
    /// Eraser setup with the D3/D4 counter channels turned off.
    D3D4ChannelsOff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchStage {
    /// Splitters transparent.
    #[default]
    A,
    /// Splitters transparent, long Δt.
    B,
    /// Manual switch, observed after Δt.
    C,
    /// Manual switch, impact observed at T = 0.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerishableSemantics {
    /// Unexpired perishable media counts as available which-way data.
    #[default]
    Objective,
    /// Only the permanent recording counts; the rest is mere subjective
    /// observation and never available.
    SubjectiveDistinct,
}

/// Switch activation table over equal-width bins of the screen window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionTable {
    pub bins: usize,
    /// Indices of bins that activate the switch.
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SwitchStrategy {
    AlwaysOff,
    AlwaysOn,
    /// Activate iff the observed impact lies in the set.
    Strategy1 {
        interval_set: IntervalSet,
    },
    Custom {
        table: DecisionTable,
    },
}

impl SwitchStrategy {
    fn depends_on_impact(&self) -> bool {
        matches!(
            self,
            SwitchStrategy::Strategy1 { .. } | SwitchStrategy::Custom { .. }
        )
    }

    /// Switch decision for the latest impact `x`. `history` holds every
    /// impact observed so far, `x` included.
    pub fn activates(&self, x: f64, history: &[f64], cfg: &OpticsConfig) -> bool {
        debug_assert!(history.last().is_none_or(|&h| h == x));
        match self {
            SwitchStrategy::AlwaysOff => false,
            SwitchStrategy::AlwaysOn => true,
            SwitchStrategy::Strategy1 { interval_set } => interval_set.contains(x),
            SwitchStrategy::Custom { table } => {
                let (lo, hi) = cfg.window();
                if x < lo || x >= hi {
                    return false;
                }
                let k = (((x - lo) / (hi - lo)) * table.bins as f64) as usize;
                table.active.contains(&k.min(table.bins - 1))
            }
        }
    }

    /// Impacts for which the switch is activated.
    pub fn activation_set(&self, cfg: &OpticsConfig) -> Result<IntervalSet> {
        match self {
            SwitchStrategy::AlwaysOff => Ok(IntervalSet::empty()),
            SwitchStrategy::AlwaysOn => Ok(IntervalSet::full(cfg)),
            SwitchStrategy::Strategy1 { interval_set } => Ok(interval_set.clone()),
            SwitchStrategy::Custom { table } => {
                let (lo, hi) = cfg.window();
                let w = (hi - lo) / table.bins as f64;
                let mut active = table.active.clone();
                active.sort_unstable();
                active.dedup();
                let mut out: Vec<(f64, f64)> = Vec::new();
                for k in active {
                    let a = lo + k as f64 * w;
                    let b = if k + 1 == table.bins { hi } else { a + w };
                    match out.last_mut() {
                        Some(last) if (last.1 - a).abs() <= 1e-12 * w => last.1 = b,
                        _ => out.push((a, b)),
                    }
                }
                IntervalSet::new(out)
            }
        }
    }
}

fn default_n_pairs() -> u64 {
    10_000
}
fn default_delta_t() -> f64 {
    SHORT_DELTA_T_S
}
fn default_window() -> f64 {
    SHORT_DELTA_T_S / 10.0
}
fn default_half() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}
fn default_ttl() -> Option<f64> {
    Some(DEFAULT_PERISHABLE_TTL_S)
}
fn default_anti_phase() -> f64 {
    FRAC_PI_2
}
fn default_noise_threshold() -> f64 {
    DEFAULT_NOISE_THRESHOLD
}

/// Everything needed to run one protocol reproducibly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub protocol: ProtocolKind,
    #[serde(default)]
    pub optics: OpticsConfig,
    #[serde(default)]
    pub model: RenderingModel,
    #[serde(default = "default_n_pairs")]
    pub n_pairs: u64,
    #[serde(default = "default_delta_t")]
    pub delta_t_s: f64,
    #[serde(default = "default_window")]
    pub coincidence_window_s: f64,
    /// Probability that a which-way record is destroyed.
    #[serde(default = "default_half")]
    pub destruction_prob: f64,
    #[serde(default)]
    pub pairing_mode: PairingMode,
    #[serde(default)]
    pub strategy: Option<SwitchStrategy>,
    #[serde(default)]
    pub outcome_hypothesis: Option<OutcomeHypothesis>,
    #[serde(default)]
    pub observation_schedule: ObservationSchedule,
    #[serde(default)]
    pub seed: u64,
    /// Double slit: which-way detectors on and recording.
    #[serde(default = "default_true")]
    pub detectors_recording: bool,
    /// Delayed choice: probability of recording which-way.
    #[serde(default = "default_half")]
    pub record_probability: f64,
    #[serde(default)]
    pub detect_no_record_variant: DetectNoRecordVariant,
    #[serde(default)]
    pub switch_stage: SwitchStage,
    #[serde(default)]
    pub microprocessor_switch: bool,
    /// Perishable media lifetime; `null` never expires.
    #[serde(default = "default_ttl")]
    pub perishable_ttl_s: Option<f64>,
    #[serde(default)]
    pub perishable_semantics: PerishableSemantics,
    /// Perishable media: impacts in this set are recorded permanently.
    /// Defaults to the δ-minimizing set.
    #[serde(default)]
    pub recording_rule: Option<IntervalSet>,
    /// Fringe phase of the D2 (anti-fringe) eraser channel.
    #[serde(default = "default_anti_phase")]
    pub anti_fringe_phase_rad: f64,
    #[serde(default = "default_noise_threshold")]
    pub noise_threshold: f64,
    #[serde(default = "default_llr_threshold")]
    pub llr_threshold: f64,
}

impl ProtocolConfig {
    pub fn new(protocol: ProtocolKind) -> Self {
        ProtocolConfig {
            protocol,
            optics: OpticsConfig::default(),
            model: RenderingModel::default(),
            n_pairs: default_n_pairs(),
            delta_t_s: default_delta_t(),
            coincidence_window_s: default_window(),
            destruction_prob: 0.5,
            pairing_mode: PairingMode::default(),
            strategy: None,
            outcome_hypothesis: None,
            observation_schedule: ObservationSchedule::default(),
            seed: 0,
            detectors_recording: true,
            record_probability: 0.5,
            detect_no_record_variant: DetectNoRecordVariant::default(),
            switch_stage: SwitchStage::default(),
            microprocessor_switch: false,
            perishable_ttl_s: default_ttl(),
            perishable_semantics: PerishableSemantics::default(),
            recording_rule: None,
            anti_fringe_phase_rad: FRAC_PI_2,
            noise_threshold: DEFAULT_NOISE_THRESHOLD,
            llr_threshold: default_llr_threshold(),
        }
    }

    pub fn with_model(mut self, model: RenderingModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_pairs(mut self, n: u64) -> Self {
        self.n_pairs = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sets Δt and scales the coincidence window to Δt/10.
    pub fn with_delta_t(mut self, delta_t_s: f64) -> Self {
        self.delta_t_s = delta_t_s;
        self.coincidence_window_s = delta_t_s / 10.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.optics.validate()?;
        let fail = |msg: &str| Err(SimError::invariant(msg));
        if self.n_pairs < 1 {
            return fail("n_pairs >= 1");
        }
        if !(self.delta_t_s.is_finite() && self.delta_t_s > 0.0) {
            return fail("delta_t_s > 0");
        }
        if !(self.coincidence_window_s >= 0.0) {
            return fail("coincidence_window_s >= 0");
        }
        if !(self.coincidence_window_s < self.delta_t_s) {
            return fail("coincidence_window_s < delta_t_s");
        }
        if !(0.0..=1.0).contains(&self.destruction_prob) {
            return fail("0 <= destruction_prob <= 1");
        }
        if !(0.0..=1.0).contains(&self.record_probability) {
            return fail("0 <= record_probability <= 1");
        }
        if self.pairing_mode == PairingMode::ExactHalfSubset && self.n_pairs % 2 == 1 {
            return fail("ExactHalfSubset requires even n_pairs");
        }
        if !(self.noise_threshold > 0.0 && self.noise_threshold <= 1.0) {
            return fail("0 < noise_threshold <= 1");
        }
        if !(self.llr_threshold.is_finite() && self.llr_threshold >= 0.0) {
            return fail("llr_threshold >= 0");
        }
        if !self.anti_fringe_phase_rad.is_finite() {
            return fail("anti_fringe_phase_rad finite");
        }
        if let Some(ttl) = self.perishable_ttl_s {
            if !(ttl >= 0.0) {
                return fail("perishable_ttl_s >= 0");
            }
        }
        if let Some(rule) = &self.recording_rule {
            rule.validate_within(&self.optics)?;
        }
        match &self.strategy {
            Some(SwitchStrategy::Strategy1 { interval_set }) => {
                interval_set.validate_within(&self.optics)?
            }
            Some(SwitchStrategy::Custom { table })
                if table.bins == 0 || table.active.iter().any(|&k| k >= table.bins) =>
            {
                return fail("decision table indices must lie in 0..bins");
            }
            _ => {}
        }
        if self.protocol == ProtocolKind::SwitchParadox {
            match self.switch_stage {
                SwitchStage::D => {
                    if self.strategy.is_none() || self.outcome_hypothesis.is_none() {
                        return fail("switch stage d requires strategy and outcome_hypothesis");
                    }
                    if self.observation_schedule != ObservationSchedule::AtT0 {
                        return fail("switch stage d requires observation_schedule = at_t0");
                    }
                }
                SwitchStage::C => {
                    if self
                        .strategy
                        .as_ref()
                        .is_some_and(SwitchStrategy::depends_on_impact)
                    {
                        return fail("switch stage c cannot use an impact-dependent strategy");
                    }
                }
                SwitchStage::A | SwitchStage::B => {}
            }
        }
        Ok(())
    }
}

/// Runs the configured protocol.
pub fn run(cfg: &ProtocolConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.protocol {
        ProtocolKind::DoubleSlit => baseline::run_double_slit(cfg),
        ProtocolKind::DelayedChoice => baseline::run_delayed_choice(cfg),
        ProtocolKind::QuantumEraser => baseline::run_quantum_eraser(cfg),
        ProtocolKind::DetectNoRecord => availability::run_detect_no_record(cfg),
        ProtocolKind::MacroscopicErasure => availability::run_macroscopic_erasure(cfg),
        ProtocolKind::PredictorExperiment => predictor::run_predictor(cfg),
        ProtocolKind::SwitchParadox => switch::run_switch_experiment(cfg),
        ProtocolKind::PerishableMedia => availability::run_perishable_media(cfg),
    }
}

fn expect_protocol(cfg: &ProtocolConfig, kind: ProtocolKind) -> Result<()> {
    cfg.validate()?;
    if cfg.protocol != kind {
        return Err(SimError::invariant(format!(
            "config is for {:?}, not {:?}",
            cfg.protocol, kind
        )));
    }
    Ok(())
}

macro_rules! entry_point {
    ($(#[$doc:meta])* $name:ident, $kind:ident, $module:ident) => {
        $(#[$doc])*
        pub fn $name(cfg: &ProtocolConfig) -> Result<RunOutput> {
            expect_protocol(cfg, ProtocolKind::$kind)?;
            $module::$name(cfg)
        }
    };
}

entry_point!(
    /// Classical two-slit run with which-way detectors on or off.
    run_double_slit, DoubleSlit, baseline);
entry_point!(
    /// Per-pair delayed decision to record which-way.
    run_delayed_choice, DelayedChoice, baseline);
entry_point!(
    /// Four-detector eraser with coincidence sorting.
    run_quantum_eraser, QuantumEraser, baseline);
entry_point!(
    /// Which-way detected but never recorded.
    run_detect_no_record, DetectNoRecord, availability);
entry_point!(
    /// Which-way records destroyed at a macroscopic time before observation.
    run_macroscopic_erasure, MacroscopicErasure, availability);
entry_point!(
    /// Impact position used to predict the later erasure flag.
    run_predictor, PredictorExperiment, predictor);
entry_point!(
    /// Staged switch experiment with outcome hypotheses.
    run_switch_experiment, SwitchParadox, switch);
entry_point!(
    /// Perishable which-way media with a record-if-in-I rule.
    run_perishable_media, PerishableMedia, availability);
