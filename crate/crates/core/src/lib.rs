//! Monte Carlo simulation of which-way experiments under two rendering
//! models.
//!
//! * [`optics`]: interference and particle screen laws, sampling, histograms.
//! * [`models`]: when which-way data counts as available.
//! * [`stats`]: posteriors, total variation, likelihood-ratio classification.
//! * [`protocols`]: the experiments themselves.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod models;
pub mod optics;
pub mod protocols;
pub mod quad;
pub mod rng;
pub mod stats;

pub use error::{Result, SimError};
pub use models::{
    available_for, select_pattern, which_way_available, AvailabilityHorizon, AvailabilityRecord,
    Medium, RenderingModel, RenderingPolicy,
};
pub use optics::{
    fringe_visibility, particle_density, pattern_cdf, sample_impact, wave_density, Histogram,
    ImpactDensity, IntervalSet, OpticsConfig, PatternDistribution, PatternKind,
};
pub use protocols::{run, ProtocolConfig, ProtocolKind, RunOutcome, RunOutput, RunResult};
pub use stats::{
    approx_posterior, bhattacharyya_coefficient, classify_pattern, contradiction_margin,
    delta_of_interval_set, exact_posterior, optimal_interval_set, required_sample_size,
    tv_distance, tv_distance_empirical, Classification, FeasibilityReport, PatternClassifier,
    Verdict, WaveMixture,
};
