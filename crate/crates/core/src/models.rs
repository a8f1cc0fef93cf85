//! Rendering policies and which-way availability.
//!
//! A rendering model decides whether which-way information "exists" for an
//! impact. `CollapseAtDetection` only asks whether a detector fired.
//! `RenderAtAvailability` asks whether the information sits on an objective,
//! unexpired, unerased medium at the evaluation time.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::optics::{OpticsConfig, PatternDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderingPolicy {
    CollapseAtDetection,
    RenderAtAvailability,
}

/// When availability is evaluated under `RenderAtAvailability`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvailabilityHorizon {
    AtImpactTime,
    #[default]
    AtObservationTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderingModel {
    pub policy: RenderingPolicy,
    #[serde(default)]
    pub horizon: AvailabilityHorizon,
}

impl Default for RenderingModel {
    fn default() -> Self {
        RenderingModel::collapse_at_detection()
    }
}

impl RenderingModel {
    pub fn collapse_at_detection() -> Self {
        RenderingModel {
            policy: RenderingPolicy::CollapseAtDetection,
            horizon: AvailabilityHorizon::AtObservationTime,
        }
    }

    pub fn render_at_availability() -> Self {
        RenderingModel {
            policy: RenderingPolicy::RenderAtAvailability,
            horizon: AvailabilityHorizon::AtObservationTime,
        }
    }

    /// The instant at which availability is evaluated for an impact.
    pub fn evaluation_time(&self, impact_time: f64, observation_time: f64) -> f64 {
        match self.horizon {
            AvailabilityHorizon::AtImpactTime => impact_time,
            AvailabilityHorizon::AtObservationTime => observation_time,
        }
    }
}

/// Where detected which-way data ends up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Medium {
    None,
    /// Subjective or otherwise non-objective storage; never counts as available.
    Volatile,
    Persistent,
    /// Objective storage that is lost `ttl_s` seconds after detection.
    /// `ttl_s = None` never expires.
    Perishable {
        ttl_s: Option<f64>,
    },
}

impl Medium {
    pub fn label(&self) -> &'static str {
        match self {
            Medium::None => "none",
            Medium::Volatile => "volatile",
            Medium::Persistent => "persistent",
            Medium::Perishable { .. } => "perishable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityRecord {
    /// A which-way detector fired.
    pub detected: bool,
    /// Written to a persistent objective medium.
    pub recorded: bool,
    pub detected_at: f64,
    pub erased_at: Option<f64>,
    pub medium: Medium,
    /// When the pattern datum is first observed.
    pub observation_time: f64,
}

impl AvailabilityRecord {
    /// No which-way detection happened.
    pub fn undetected(observation_time: f64) -> Self {
        AvailabilityRecord {
            detected: false,
            recorded: false,
            detected_at: observation_time,
            erased_at: None,
            medium: Medium::None,
            observation_time,
        }
    }

    pub fn detected_on(medium: Medium, detected_at: f64, observation_time: f64) -> Self {
        AvailabilityRecord {
            detected: true,
            recorded: matches!(medium, Medium::Persistent),
            detected_at,
            erased_at: None,
            medium,
            observation_time,
        }
    }

    pub fn with_erasure(mut self, erased_at: f64) -> Self {
        self.erased_at = Some(erased_at);
        self
    }

    pub fn expiry(&self) -> Option<f64> {
        match self.medium {
            Medium::Perishable { ttl_s: Some(ttl) } => Some(self.detected_at + ttl),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.recorded && !self.detected {
            return Err(SimError::invariant("recorded implies detected"));
        }
        if self.detected && matches!(self.medium, Medium::None | Medium::Volatile) && self.recorded
        {
            return Err(SimError::invariant("recorded requires an objective medium"));
        }
        if let Some(e) = self.erased_at {
            if e < self.detected_at {
                return Err(SimError::invariant("erased_at must not precede detection"));
            }
        }
        if let Medium::Perishable { ttl_s: Some(ttl) } = self.medium {
            if !(ttl >= 0.0) {
                return Err(SimError::invariant("perishable ttl must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Whether which-way information counts as existing at time `at`.
pub fn which_way_available(rec: &AvailabilityRecord, model: &RenderingModel, at: f64) -> bool {
    match model.policy {
        RenderingPolicy::CollapseAtDetection => rec.detected,
        RenderingPolicy::RenderAtAvailability => {
            if !rec.detected || rec.erased_at.is_some_and(|e| e <= at) {
                return false;
            }
            match rec.medium {
                Medium::None | Medium::Volatile => false,
                Medium::Persistent => true,
                Medium::Perishable { .. } => rec.expiry().is_none_or(|exp| at < exp),
            }
        }
    }
}

/// Availability at the time the model cares about for this record.
pub fn available_for(rec: &AvailabilityRecord, model: &RenderingModel, impact_time: f64) -> bool {
    which_way_available(
        rec,
        model,
        model.evaluation_time(impact_time, rec.observation_time),
    )
}

/// Particle law when which-way is available, otherwise the interference law
/// at `subset_phase`.
pub fn select_pattern(
    avail: bool,
    cfg: &OpticsConfig,
    subset_phase: f64,
) -> Result<PatternDistribution> {
    if avail {
        PatternDistribution::particle(cfg)
    } else {
        PatternDistribution::wave(cfg, subset_phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{ImpactDensity, PatternKind};
    use crate::quad;
    use std::f64::consts::PI;

    fn raa() -> RenderingModel {
        RenderingModel::render_at_availability()
    }

    fn cad() -> RenderingModel {
        RenderingModel::collapse_at_detection()
    }

    #[test]
    fn detected_not_recorded() {
        let rec = AvailabilityRecord::detected_on(Medium::None, 0.0, 1.0);
        assert!(!which_way_available(&rec, &raa(), 1.0));
        assert!(which_way_available(&rec, &cad(), 1.0));
    }

    #[test]
    fn erased_before_observation() {
        let rec = AvailabilityRecord::detected_on(Medium::Persistent, 0.0, 2.0).with_erasure(1.0);
        assert!(!which_way_available(&rec, &raa(), 2.0));
        assert!(which_way_available(&rec, &raa(), 0.5));
        assert!(which_way_available(&rec, &cad(), 2.0));
    }

    #[test]
    fn perishable_and_volatile() {
        let rec =
            AvailabilityRecord::detected_on(Medium::Perishable { ttl_s: Some(60.0) }, 10.0, 0.0);
        assert_eq!(rec.expiry(), Some(70.0));
        assert!(which_way_available(&rec, &raa(), 69.9));
        assert!(!which_way_available(&rec, &raa(), 70.0));
        let forever = AvailabilityRecord::detected_on(Medium::Perishable { ttl_s: None }, 0.0, 0.0);
        assert!(which_way_available(&forever, &raa(), 1e12));
        let vol = AvailabilityRecord::detected_on(Medium::Volatile, 0.0, 0.0);
        assert!(!which_way_available(&vol, &raa(), 0.0));
    }

    #[test]
    fn policy_separation_for_unrecorded_detection() {
        for t in [0.0, 1e-8, 60.0] {
            let rec = AvailabilityRecord::detected_on(Medium::None, 0.0, t);
            assert_ne!(
                available_for(&rec, &raa(), 0.0),
                available_for(&rec, &cad(), 0.0)
            );
        }
    }

    #[test]
    fn horizon_selects_time() {
        let rec = AvailabilityRecord::detected_on(Medium::Persistent, 0.0, 5.0).with_erasure(3.0);
        let at_impact = RenderingModel {
            horizon: AvailabilityHorizon::AtImpactTime,
            ..raa()
        };
        assert!(available_for(&rec, &at_impact, 1.0));
        assert!(!available_for(&rec, &raa(), 1.0));
    }

    #[test]
    fn record_validation() {
        let mut rec = AvailabilityRecord::undetected(0.0);
        rec.recorded = true;
        assert!(rec.validate().is_err());
        let bad = AvailabilityRecord::detected_on(Medium::Persistent, 2.0, 3.0).with_erasure(1.0);
        assert!(bad.validate().is_err());
        assert!(
            AvailabilityRecord::detected_on(Medium::Persistent, 0.0, 3.0)
                .validate()
                .is_ok()
        );
    }

    #[test]
    fn select_pattern_examples() {
        let c = OpticsConfig::default();
        assert_eq!(
            select_pattern(true, &c, 0.0).unwrap().kind(),
            PatternKind::Particle
        );
        let w = select_pattern(false, &c, 0.0).unwrap();
        assert_eq!(w.kind(), PatternKind::Wave);
        assert_eq!(w.phase_rad(), 0.0);
        let anti = select_pattern(false, &c, PI / 2.0).unwrap();
        assert!(anti.pdf(0.0) < 1e-25);
    }

    #[test]
    fn eraser_marginal_is_flat() {
        // ½ particle (D3/D4) + ¼ wave φ=0 (D1) + ¼ wave φ=π/2 (D2)
        let c = OpticsConfig::default();
        let p = select_pattern(true, &c, 0.0).unwrap();
        let d1 = select_pattern(false, &c, 0.0).unwrap();
        let d2 = select_pattern(false, &c, PI / 2.0).unwrap();
        let mix = |x: f64| 0.5 * p.pdf(x) + 0.25 * d1.pdf(x) + 0.25 * d2.pdf(x);
        let (lo, hi) = c.window();
        let dev = quad::piecewise_simpson(|x| (mix(x) - p.pdf(x)).abs(), lo, hi, 40, 1e-12);
        assert!(dev < 1e-9, "{dev}");
    }
}
