//! Shared machinery: timing, pattern laws, parallel pair generation and
//! result assembly.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::coincidence::{coincidence_match, CoincidenceOutcome, DetectorEvent, SignalEvent};
use super::events::{
    event_digest, Detector, PhotonPairEvent, Slit, Splitter, SplitterDecision, SplitterOutcome,
};
use super::result::{
    CoincidenceSummary, EmpiricalTv, RunOutcome, RunOutput, RunResult, SubsetSummary,
};
use super::{ObservationSchedule, ProtocolConfig};
use crate::error::{Result, SimError};
use crate::models::{available_for, AvailabilityRecord};
use crate::optics::{fringe_visibility, Histogram, IntervalSet, PatternDistribution, PatternKind};
use crate::rng::{pair_stream, StreamRole};
use crate::stats::{
    tv_distance_empirical_aligned, FeasibilityReport, PatternClassifier, WaveMixture,
};

/// Event times for pair `i`. Pairs are spaced 1.5·Δt apart so at most one is
/// in flight.
#[derive(Debug, Clone, Copy)]
pub(super) struct Timeline {
    pub dt: f64,
    pub schedule: ObservationSchedule,
}

impl Timeline {
    pub fn new(cfg: &ProtocolConfig) -> Self {
        Timeline {
            dt: cfg.delta_t_s,
            schedule: cfg.observation_schedule,
        }
    }

    pub fn created(&self, i: u64) -> f64 {
        1.5 * i as f64 * self.dt
    }

    pub fn signal(&self, i: u64) -> f64 {
        self.created(i) + 0.25 * self.dt
    }

    pub fn detector(&self, i: u64) -> f64 {
        self.signal(i) + self.dt
    }

    /// Macroscopic destruction of a record, after the idler click but
    /// before an after-Δt observation.
    pub fn erasure(&self, i: u64) -> f64 {
        self.signal(i) + 1.0625 * self.dt
    }

    pub fn observation(&self, i: u64) -> f64 {
        match self.schedule {
            ObservationSchedule::AtT0 => self.signal(i),
            ObservationSchedule::AfterDeltaT => self.signal(i) + 1.125 * self.dt,
        }
    }
}

/// The three laws every protocol draws from.
#[derive(Debug, Clone)]
pub(super) struct PatternBank {
    pub particle: PatternDistribution,
    pub wave: PatternDistribution,
    pub anti: PatternDistribution,
}

impl PatternBank {
    pub fn new(cfg: &ProtocolConfig) -> Result<Self> {
        Ok(PatternBank {
            particle: PatternDistribution::particle(&cfg.optics)?,
            wave: PatternDistribution::wave(&cfg.optics, 0.0)?,
            anti: PatternDistribution::wave(&cfg.optics, cfg.anti_fringe_phase_rad)?,
        })
    }

    /// Interference law for a phase that is either 0 or the anti-fringe phase.
    pub fn wave_at(&self, phase: f64) -> &PatternDistribution {
        if phase == 0.0 {
            &self.wave
        } else {
            &self.anti
        }
    }

    /// Renders an impact: particle if which-way is available under the
    /// model, otherwise the interference law at `phase`.
    pub fn render(
        &self,
        cfg: &ProtocolConfig,
        rec: &AvailabilityRecord,
        impact_time: f64,
        phase: f64,
    ) -> &PatternDistribution {
        if available_for(rec, &cfg.model, impact_time) {
            &self.particle
        } else {
            self.wave_at(phase)
        }
    }

    /// Renders the event's impact from its availability record and draws `X`.
    pub fn render_into(
        &self,
        cfg: &ProtocolConfig,
        ev: &mut PhotonPairEvent,
        phase: f64,
        rng: &mut ChaCha8Rng,
    ) {
        let dist = self.render(cfg, &ev.availability, ev.t_signal_impact, phase);
        impact(ev, dist, rng);
    }
}

/// Draws `X` from `dist` and fills the rendering fields of `ev`.
pub(super) fn impact(ev: &mut PhotonPairEvent, dist: &PatternDistribution, rng: &mut ChaCha8Rng) {
    ev.signal_x = Some(dist.sample(rng));
    ev.rendered = Some(dist.kind());
    ev.phase_rad = if dist.kind() == PatternKind::Wave {
        dist.phase_rad()
    } else {
        0.0
    };
}

/// Skeleton event for pair `i` with a fair slit tag.
pub(super) fn new_event(t: &Timeline, i: u64, routing: &mut ChaCha8Rng) -> PhotonPairEvent {
    let slit = if routing.gen_bool(0.5) {
        Slit::Slit1
    } else {
        Slit::Slit2
    };
    PhotonPairEvent {
        pair_id: i,
        t_created: t.created(i),
        slit,
        t_signal_impact: t.signal(i),
        signal_x: None,
        idler_route: Vec::new(),
        detector: None,
        t_detector: t.detector(i),
        erased: None,
        availability: AvailabilityRecord::undetected(t.observation(i)),
        rendered: None,
        phase_rad: 0.0,
        switch_on: None,
    }
}

fn decide(splitter: Splitter, routing: &mut ChaCha8Rng) -> SplitterDecision {
    let outcome = if routing.gen_bool(0.5) {
        SplitterOutcome::Reflect
    } else {
        SplitterOutcome::Transmit
    };
    SplitterDecision { splitter, outcome }
}

/// Eraser idler routing: BS_a (slit 1) or BS_b (slit 2) reflects to the
/// which-way detectors D3/D4, or transmits to BS_c, which sends the photon
/// to D1 or D2. Sets route, detector and erasure flag.
pub(super) fn route_idler(ev: &mut PhotonPairEvent, routing: &mut ChaCha8Rng) -> Detector {
    let first = match ev.slit {
        Slit::Slit1 => Splitter::BsA,
        Slit::Slit2 => Splitter::BsB,
    };
    let d = decide(first, routing);
    ev.idler_route.push(d);
    let det = match d.outcome {
        SplitterOutcome::Reflect => match ev.slit {
            Slit::Slit1 => Detector::D3,
            Slit::Slit2 => Detector::D4,
        },
        SplitterOutcome::Transmit => {
            let c = decide(Splitter::BsC, routing);
            ev.idler_route.push(c);
            match c.outcome {
                SplitterOutcome::Reflect => Detector::D1,
                SplitterOutcome::Transmit => Detector::D2,
            }
        }
    };
    ev.detector = Some(det);
    ev.erased = Some(det.erases());
    det
}

/// Generates one event per pair in parallel, each from its own streams.
pub(super) fn generate<F>(cfg: &ProtocolConfig, f: F) -> Result<Vec<PhotonPairEvent>>
where
    F: Fn(u64, &mut ChaCha8Rng, &mut ChaCha8Rng) -> Result<PhotonPairEvent> + Sync,
{
    let seed = cfg.seed;
    (0..cfg.n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut imp = pair_stream(seed, i, StreamRole::Impact);
            let mut rt = pair_stream(seed, i, StreamRole::Routing);
            f(i, &mut imp, &mut rt)
        })
        .collect()
}

/// A law conditioned on an interval set, sampled by CDF inversion inside a
/// mass-weighted interval.
#[derive(Debug, Clone)]
struct Restricted {
    dist: PatternDistribution,
    /// `(lo, hi, cdf(lo), cdf(hi))` per interval.
    parts: Vec<(f64, f64, f64, f64)>,
    mass: f64,
}

impl Restricted {
    fn new(dist: &PatternDistribution, set: &IntervalSet) -> Self {
        let parts: Vec<_> = set
            .iter()
            .map(|(lo, hi)| (lo, hi, dist.cdf_at(lo), dist.cdf_at(hi)))
            .collect();
        let mass = parts.iter().map(|p| p.3 - p.2).sum();
        Restricted {
            dist: dist.clone(),
            parts,
            mass,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut target = rng.gen::<f64>() * self.mass;
        let mut chosen = self.parts[self.parts.len() - 1];
        for &p in &self.parts {
            let m = p.3 - p.2;
            if target < m {
                chosen = p;
                break;
            }
            target -= m;
        }
        let (lo, hi, c0, c1) = chosen;
        let u = c0 + rng.gen::<f64>() * (c1 - c0);
        self.dist.quantile(u).clamp(lo, hi)
    }
}

/// The law "`inside` on `set`, `outside` off it", renormalized by its total
/// mass `δ`. Only a probability law as is when `δ = 1`.
#[derive(Debug, Clone)]
pub(super) struct SplitLaw {
    inside: Restricted,
    outside: Restricted,
    pub delta: f64,
}

impl SplitLaw {
    pub fn new(
        set: &IntervalSet,
        inside: &PatternDistribution,
        outside: &PatternDistribution,
    ) -> Self {
        let cfg = inside.config();
        let inside = Restricted::new(inside, set);
        let outside = Restricted::new(outside, &set.complement(cfg));
        let delta = inside.mass + outside.mass;
        SplitLaw {
            inside,
            outside,
            delta,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        if !(self.delta > 0.0) {
            return Err(SimError::Sampling("split law has zero mass".into()));
        }
        let take_inside = rng.gen::<f64>() * self.delta < self.inside.mass;
        Ok(if take_inside {
            self.inside.sample(rng)
        } else {
            self.outside.sample(rng)
        })
    }
}

struct SubsetSpec {
    pooled: bool,
    region: Option<IntervalSet>,
    wave: Vec<(f64, f64)>,
    purity: bool,
    samples: Vec<f64>,
    slits: Vec<Slit>,
}

/// Collects impact positions into named subsets and summarizes them.
pub(super) struct Assembly<'a> {
    cfg: &'a ProtocolConfig,
    subsets: BTreeMap<String, SubsetSpec>,
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
    pub unmatched: u64,
    pub coincidence: Option<CoincidenceSummary>,
    tv_pair: Option<(String, String)>,
}

impl<'a> Assembly<'a> {
    pub fn new(cfg: &'a ProtocolConfig) -> Self {
        Assembly {
            cfg,
            subsets: BTreeMap::new(),
            flags: Vec::new(),
            warnings: Vec::new(),
            unmatched: 0,
            coincidence: None,
            tv_pair: None,
        }
    }

    /// Declares a subset classified against the interference mixture `wave`.
    pub fn define(&mut self, name: &str, pooled: bool, wave: &[(f64, f64)]) -> &mut Self {
        self.subsets.insert(
            name.to_string(),
            SubsetSpec {
                pooled,
                region: None,
                wave: wave.to_vec(),
                purity: false,
                samples: Vec::new(),
                slits: Vec::new(),
            },
        );
        self
    }

    /// Marks a subset as selected by position, so it is classified against
    /// laws conditioned on `region`.
    pub fn within(&mut self, name: &str, region: IntervalSet) -> &mut Self {
        if let Some(s) = self.subsets.get_mut(name) {
            s.region = Some(region);
        }
        self
    }

    pub fn with_purity(&mut self, name: &str) -> &mut Self {
        if let Some(s) = self.subsets.get_mut(name) {
            s.purity = true;
        }
        self
    }

    pub fn push(&mut self, name: &str, x: f64, slit: Slit) {
        let s = self
            .subsets
            .get_mut(name)
            .expect("subset declared before use");
        s.samples.push(x);
        s.slits.push(slit);
    }

    pub fn compare(&mut self, a: &str, b: &str) {
        self.tv_pair = Some((a.to_string(), b.to_string()));
    }

    pub fn flag(&mut self, f: &str) {
        self.flags.push(f.to_string());
    }

    pub fn finish(self, events: Vec<PhotonPairEvent>) -> Result<RunOutput> {
        let cfg = self.cfg;
        let optics = &cfg.optics;
        let summaries: Vec<(String, SubsetSummary)> = self
            .subsets
            .par_iter()
            .map(|(name, s)| {
                let count = s.samples.len() as u64;
                if count == 0 {
                    return Ok((
                        name.clone(),
                        SubsetSummary {
                            pooled: s.pooled,
                            count,
                            histogram: None,
                            visibility: None,
                            classification: None,
                            wave_hypothesis: s.wave.clone(),
                            region: s.region.clone(),
                            slit_purity: None,
                        },
                    ));
                }
                let mut hist = Histogram::fringe_aligned(optics);
                for &x in &s.samples {
                    hist.add(x);
                }
                let classifier =
                    PatternClassifier::with_wave(optics, WaveMixture::new(optics, &s.wave)?)?
                        .with_threshold(cfg.llr_threshold);
                let slit_purity = s.purity.then(|| {
                    let ones = s.slits.iter().filter(|&&sl| sl == Slit::Slit1).count() as f64;
                    ones.max(count as f64 - ones) / count as f64
                });
                Ok((
                    name.clone(),
                    SubsetSummary {
                        pooled: s.pooled,
                        count,
                        visibility: Some(fringe_visibility(&hist, optics)?),
                        histogram: Some(hist),
                        classification: Some(match &s.region {
                            Some(region) => classifier.classify_within(&s.samples, region)?,
                            None => classifier.classify(&s.samples)?,
                        }),
                        wave_hypothesis: s.wave.clone(),
                        region: s.region.clone(),
                        slit_purity,
                    },
                ))
            })
            .collect::<Result<_>>()?;

        let empirical_tv = match &self.tv_pair {
            Some((a, b)) => {
                let (sa, sb) = (&self.subsets[a].samples, &self.subsets[b].samples);
                if sa.is_empty() || sb.is_empty() {
                    None
                } else {
                    Some(EmpiricalTv {
                        subset_a: a.clone(),
                        subset_b: b.clone(),
                        value: tv_distance_empirical_aligned(sa, sb, optics)?,
                    })
                }
            }
            None => None,
        };

        let result = RunResult {
            protocol: cfg.protocol,
            seed: cfg.seed,
            outcome: RunOutcome::Completed,
            pairs_generated: events.len() as u64,
            unmatched: self.unmatched,
            subsets: summaries.into_iter().collect(),
            coincidence: self.coincidence,
            empirical_tv,
            predictor: None,
            feasibility: None,
            flags: self.flags,
            warnings: self.warnings,
            event_digest: event_digest(&events),
            config: cfg.clone(),
        };
        let subset_samples = self
            .subsets
            .into_iter()
            .map(|(k, s)| (k, s.samples))
            .collect();
        Ok(RunOutput {
            result,
            events,
            subset_samples,
        })
    }
}

/// Output for a run that generated nothing.
pub(super) fn no_samples(
    cfg: &ProtocolConfig,
    outcome: RunOutcome,
    feasibility: Option<FeasibilityReport>,
    flags: Vec<String>,
) -> RunOutput {
    let result = RunResult {
        protocol: cfg.protocol,
        seed: cfg.seed,
        outcome,
        pairs_generated: 0,
        unmatched: 0,
        subsets: BTreeMap::new(),
        coincidence: None,
        empirical_tv: None,
        predictor: None,
        feasibility,
        flags,
        warnings: Vec::new(),
        event_digest: event_digest(&[]),
        config: cfg.clone(),
    };
    RunOutput {
        result,
        events: Vec::new(),
        subset_samples: BTreeMap::new(),
    }
}

/// Matches screen impacts to idler clicks. Only clicks from detectors in
/// `counted` reach the counter.
pub(super) fn count_coincidences(
    cfg: &ProtocolConfig,
    events: &[PhotonPairEvent],
    counted: &[Detector],
) -> (CoincidenceOutcome, CoincidenceSummary) {
    let signals: Vec<SignalEvent> = events
        .iter()
        .map(|e| SignalEvent {
            pair_id: e.pair_id,
            time: e.t_signal_impact,
        })
        .collect();
    let clicks: Vec<DetectorEvent> = events
        .iter()
        .filter_map(|e| {
            e.detector
                .filter(|d| counted.contains(d))
                .map(|d| DetectorEvent {
                    time: e.t_detector,
                    detector: d,
                })
        })
        .collect();
    let out = coincidence_match(&signals, &clicks, cfg.delta_t_s, cfg.coincidence_window_s);
    let matched = out.matched() as u64;
    let n = signals.len() as u64;
    let summary = CoincidenceSummary {
        signals: n,
        detector_events: clicks.len() as u64,
        matched,
        unmatched: n - matched,
        ambiguities: out.ambiguities as u64,
        mismatch_rate: if n == 0 {
            0.0
        } else {
            (n - matched + out.ambiguities as u64) as f64 / n as f64
        },
    };
    (out, summary)
}
