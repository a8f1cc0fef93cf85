//! Screen-impact laws for the two-slit setup.
//!
//! Two closed forms are supported: the interference ("wave") law with density
//! proportional to `cos²(πx/a + φ)` and the flat non-interference ("particle")
//! law. Both are conditioned on landing inside a finite symmetric window
//! `[-h, h]`, since neither is normalizable on the whole line.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::quad;

/// Relative tolerance for treating `W / a` as an integer.
pub const INTEGER_FRINGE_TOL: f64 = 1e-9;
/// Halfwidth / distance ratio above which the small-angle forms are suspect.
pub const PARAXIAL_LIMIT: f64 = 0.1;
/// Inverse-CDF target accuracy in probability space.
pub const INVERSE_CDF_TOL: f64 = 1e-12;
pub const BINS_PER_PERIOD: usize = 50;
pub const MAX_BINS: usize = 500;

const ENVELOPE_CELLS: usize = 1024;

/// Physical parameters of the two-slit geometry. Lengths in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpticsConfig {
    pub wavelength_m: f64,
    pub slit_separation_m: f64,
    pub slit_screen_distance_m: f64,
    pub screen_halfwidth_m: f64,
    /// Source intensity. Cancels in every normalized quantity.
    pub intensity_scale: f64,
    /// Replace the flat particle law by the sum of two single-slit envelopes.
    pub envelope_enabled: bool,
    /// Single-slit aperture, only read when `envelope_enabled` is set.
    pub slit_width_m: f64,
}

impl Default for OpticsConfig {
    /// 500 nm light, 0.5 mm slit spacing, 1 m to the screen: fringe period
    /// 1 mm, and a 10 mm window spanning exactly ten periods.
    fn default() -> Self {
        OpticsConfig {
            wavelength_m: 5e-7,
            slit_separation_m: 5e-4,
            slit_screen_distance_m: 1.0,
            screen_halfwidth_m: 5e-3,
            intensity_scale: 1.0,
            envelope_enabled: false,
            slit_width_m: 5e-5,
        }
    }
}

impl OpticsConfig {
    /// Fringe period `a = λL/d`.
    pub fn fringe_scale(&self) -> f64 {
        self.wavelength_m * self.slit_screen_distance_m / self.slit_separation_m
    }

    pub fn halfwidth(&self) -> f64 {
        self.screen_halfwidth_m
    }

    pub fn window_width(&self) -> f64 {
        2.0 * self.screen_halfwidth_m
    }

    pub fn window(&self) -> (f64, f64) {
        (-self.screen_halfwidth_m, self.screen_halfwidth_m)
    }

    /// Number of fringe periods covered by the window, `W / a`.
    pub fn fringe_periods(&self) -> f64 {
        self.window_width() / self.fringe_scale()
    }

    pub fn integer_fringe_count(&self) -> Option<u64> {
        let m = self.fringe_periods();
        let r = m.round();
        if r >= 1.0 && (m - r).abs() <= INTEGER_FRINGE_TOL * r {
            Some(r as u64)
        } else {
            None
        }
    }

    /// True when the closed-form constants apply: integer-fringe window and
    /// flat particle law.
    pub fn closed_form(&self) -> bool {
        !self.envelope_enabled && self.integer_fringe_count().is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("wavelength_m", self.wavelength_m),
            ("slit_separation_m", self.slit_separation_m),
            ("slit_screen_distance_m", self.slit_screen_distance_m),
            ("screen_halfwidth_m", self.screen_halfwidth_m),
            ("intensity_scale", self.intensity_scale),
            ("slit_width_m", self.slit_width_m),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::invariant(format!(
                    "optics.{name} must be positive and finite (got {v})"
                )));
            }
        }
        let a = self.fringe_scale();
        if !(a.is_finite() && a > 0.0) {
            return Err(SimError::invariant(
                "fringe scale a = λL/d must be positive and finite",
            ));
        }
        Ok(())
    }

    /// Validation for callers that rely on the integer-fringe closed forms.
    pub fn validate_integer_fringe_window(&self) -> Result<u64> {
        self.validate()?;
        self.integer_fringe_count().ok_or_else(|| {
            SimError::invariant(format!(
                "integer_fringe_window: window spans {} fringe periods",
                self.fringe_periods()
            ))
        })
    }

    pub fn paraxial_warning(&self) -> Option<String> {
        let ratio = self.screen_halfwidth_m / self.slit_screen_distance_m;
        (ratio > PARAXIAL_LIMIT).then(|| {
            format!(
                "paraxial approximation questionable: halfwidth/L = {ratio:.3} > {PARAXIAL_LIMIT}"
            )
        })
    }

    pub fn check_in_window(&self, x: f64) -> Result<()> {
        let h = self.halfwidth();
        if x.is_finite() && (-h..=h).contains(&x) {
            Ok(())
        } else {
            Err(SimError::Domain { x, lo: -h, hi: h })
        }
    }

    /// Fringe-aligned bin count: 50 bins per period, capped at 500.
    pub fn histogram_bins(&self) -> usize {
        let periods = (self.fringe_periods() - INTEGER_FRINGE_TOL).ceil().max(1.0) as usize;
        (BINS_PER_PERIOD * periods).min(MAX_BINS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Wave,
    Particle,
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternKind::Wave => f.write_str("wave"),
            PatternKind::Particle => f.write_str("particle"),
        }
    }
}

/// Anything with a probability density on the screen.
pub trait ImpactDensity {
    /// Density at `x`, without the window check.
    fn pdf(&self, x: f64) -> f64;
}

#[derive(Debug)]
struct EnvelopeTable {
    lo: f64,
    step: f64,
    /// Normalized CDF at the cell edges.
    cum: Vec<f64>,
}

/// A normalized screen-impact law on the configured window.
#[derive(Debug, Clone)]
pub struct PatternDistribution {
    kind: PatternKind,
    phase_rad: f64,
    config: OpticsConfig,
    norm: f64,
    envelope: Option<Arc<EnvelopeTable>>,
}

fn sinc_sq(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 3.0
    } else {
        let s = u.sin() / u;
        s * s
    }
}

/// Unnormalized two-slit single-slit envelope sum.
fn envelope_raw(cfg: &OpticsConfig, x: f64) -> f64 {
    let k = PI * cfg.slit_width_m / (cfg.wavelength_m * cfg.slit_screen_distance_m);
    let half_d = 0.5 * cfg.slit_separation_m;
    sinc_sq(k * (x - half_d)) + sinc_sq(k * (x + half_d))
}

impl PatternDistribution {
    /// Interference law `∝ cos²(πx/a + phase)`.
    pub fn wave(cfg: &OpticsConfig, phase_rad: f64) -> Result<Self> {
        cfg.validate()?;
        if !phase_rad.is_finite() {
            return Err(SimError::invariant("phase must be finite"));
        }
        let w = cfg.window_width();
        let norm = if cfg.integer_fringe_count().is_some() {
            2.0 / w
        } else {
            let a = cfg.fringe_scale();
            let h = cfg.halfwidth();
            let mass = 0.5 * w
                + a / (4.0 * PI)
                    * ((2.0 * PI * h / a + 2.0 * phase_rad).sin()
                        - (-2.0 * PI * h / a + 2.0 * phase_rad).sin());
            1.0 / mass
        };
        Ok(PatternDistribution {
            kind: PatternKind::Wave,
            phase_rad,
            config: cfg.clone(),
            norm,
            envelope: None,
        })
    }

    /// Non-interference law: flat on the window, or the single-slit envelope
    /// sum when `envelope_enabled` is set.
    pub fn particle(cfg: &OpticsConfig) -> Result<Self> {
        cfg.validate()?;
        let (norm, envelope) = if cfg.envelope_enabled {
            let (lo, hi) = cfg.window();
            let step = (hi - lo) / ENVELOPE_CELLS as f64;
            let mut cum = Vec::with_capacity(ENVELOPE_CELLS + 1);
            let mut acc = 0.0;
            cum.push(0.0);
            for i in 0..ENVELOPE_CELLS {
                let a = lo + i as f64 * step;
                acc += quad::adaptive_simpson(|x| envelope_raw(cfg, x), a, a + step, 1e-14);
                cum.push(acc);
            }
            let total = acc;
            for c in &mut cum {
                *c /= total;
            }
            (1.0 / total, Some(Arc::new(EnvelopeTable { lo, step, cum })))
        } else {
            (1.0 / cfg.window_width(), None)
        };
        Ok(PatternDistribution {
            kind: PatternKind::Particle,
            phase_rad: 0.0,
            config: cfg.clone(),
            norm,
            envelope,
        })
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn phase_rad(&self) -> f64 {
        self.phase_rad
    }

    pub fn config(&self) -> &OpticsConfig {
        &self.config
    }

    /// Normalization constant applied to the raw shape.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        self.config.check_in_window(x)?;
        Ok(self.pdf(x))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.config.check_in_window(x)?;
        Ok(self.cdf_at(x))
    }

    /// CDF without the window check; saturates outside the window.
    pub(crate) fn cdf_at(&self, x: f64) -> f64 {
        let h = self.config.halfwidth();
        if x <= -h {
            return 0.0;
        }
        if x >= h {
            return 1.0;
        }
        let v = match (self.kind, &self.envelope) {
            (PatternKind::Wave, _) => {
                let a = self.config.fringe_scale();
                let p2 = 2.0 * self.phase_rad;
                self.norm
                    * (0.5 * (x + h)
                        + a / (4.0 * PI)
                            * ((2.0 * PI * x / a + p2).sin() - (-2.0 * PI * h / a + p2).sin()))
            }
            (PatternKind::Particle, None) => (x + h) / self.config.window_width(),
            (PatternKind::Particle, Some(t)) => {
                let k = (((x - t.lo) / t.step) as usize).min(ENVELOPE_CELLS - 1);
                let start = t.lo + k as f64 * t.step;
                t.cum[k]
                    + self.norm
                        * quad::adaptive_simpson(|y| envelope_raw(&self.config, y), start, x, 1e-15)
            }
        };
        v.clamp(0.0, 1.0)
    }

    /// Probability mass of an interval set.
    pub fn probability(&self, set: &IntervalSet) -> f64 {
        set.iter()
            .map(|(lo, hi)| self.cdf_at(hi) - self.cdf_at(lo))
            .sum()
    }

    /// Inverse CDF: safeguarded Newton with a bisection fallback, to
    /// `|CDF(x) - u| <= 1e-12`.
    pub fn quantile(&self, u: f64) -> f64 {
        let h = self.config.halfwidth();
        if u <= 0.0 {
            return -h;
        }
        if u >= 1.0 {
            return h;
        }
        let w = self.config.window_width();
        let mut x = match (self.kind, &self.envelope) {
            (PatternKind::Particle, None) => return (-h + u * w).min(h),
            (PatternKind::Particle, Some(t)) => {
                let k = t.cum.partition_point(|&c| c <= u).clamp(1, ENVELOPE_CELLS) - 1;
                let span = t.cum[k + 1] - t.cum[k];
                let frac = if span > 0.0 {
                    (u - t.cum[k]) / span
                } else {
                    0.5
                };
                t.lo + (k as f64 + frac) * t.step
            }
            (PatternKind::Wave, _) => -h + u * w,
        };
        let (mut lo, mut hi) = (-h, h);
        for _ in 0..200 {
            let f = self.cdf_at(x) - u;
            if f.abs() <= INVERSE_CDF_TOL {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= f64::EPSILON * w {
                break;
            }
            let d = self.pdf(x);
            let newton = if d > 0.0 { x - f / d } else { f64::NAN };
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

impl ImpactDensity for PatternDistribution {
    fn pdf(&self, x: f64) -> f64 {
        match (self.kind, &self.envelope) {
            (PatternKind::Wave, _) => {
                let c = (PI * x / self.config.fringe_scale() + self.phase_rad).cos();
                self.norm * c * c
            }
            (PatternKind::Particle, None) => self.norm,
            (PatternKind::Particle, Some(_)) => self.norm * envelope_raw(&self.config, x),
        }
    }
}

/// Normalized interference density at `x`.
pub fn wave_density(x: f64, cfg: &OpticsConfig, phase_rad: f64) -> Result<f64> {
    PatternDistribution::wave(cfg, phase_rad)?.density(x)
}

/// Normalized non-interference density at `x`.
pub fn particle_density(x: f64, cfg: &OpticsConfig) -> Result<f64> {
    PatternDistribution::particle(cfg)?.density(x)
}

pub fn pattern_cdf(dist: &PatternDistribution, x: f64) -> Result<f64> {
    dist.cdf(x)
}

pub fn sample_impact<R: Rng + ?Sized>(dist: &PatternDistribution, rng: &mut R) -> f64 {
    dist.sample(rng)
}

/// Sorted, pairwise disjoint half-open intervals `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl TryFrom<Vec<[f64; 2]>> for IntervalSet {
    type Error = SimError;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        IntervalSet::new(v.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<IntervalSet> for Vec<[f64; 2]> {
    fn from(s: IntervalSet) -> Self {
        s.intervals.into_iter().map(|(a, b)| [a, b]).collect()
    }
}

impl IntervalSet {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SimError::invariant(format!(
                    "interval {i} must satisfy lo < hi (got [{lo}, {hi}))"
                )));
            }
            if i > 0 && intervals[i - 1].1 > lo {
                return Err(SimError::invariant(format!(
                    "intervals must be sorted and disjoint (interval {i} starts at {lo})"
                )));
            }
        }
        Ok(IntervalSet { intervals })
    }

    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn full(cfg: &OpticsConfig) -> Self {
        let (lo, hi) = cfg.window();
        IntervalSet {
            intervals: vec![(lo, hi)],
        }
    }

    pub fn validate_within(&self, cfg: &OpticsConfig) -> Result<()> {
        let (lo, hi) = cfg.window();
        match (self.intervals.first(), self.intervals.last()) {
            (Some(first), Some(last)) if first.0 < lo || last.1 > hi => Err(SimError::invariant(
                format!("interval set must lie within the screen window [{lo}, {hi}]"),
            )),
            _ => Ok(()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.intervals.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        let k = self.intervals.partition_point(|&(lo, _)| lo <= x);
        k > 0 && x < self.intervals[k - 1].1
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// Complement within the screen window.
    pub fn complement(&self, cfg: &OpticsConfig) -> IntervalSet {
        let (wlo, whi) = cfg.window();
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = wlo;
        for &(lo, hi) in &self.intervals {
            if lo > cursor {
                out.push((cursor, lo.min(whi)));
            }
            cursor = cursor.max(hi);
        }
        if cursor < whi {
            out.push((cursor, whi));
        }
        IntervalSet { intervals: out }
    }
}

/// Equal-width binned counts over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram {
            lo,
            hi,
            counts: vec![0; bins.max(1)],
        }
    }

    /// Window-wide histogram with bin edges on fringe boundaries.
    pub fn fringe_aligned(cfg: &OpticsConfig) -> Self {
        let (lo, hi) = cfg.window();
        Histogram::new(lo, hi, cfg.histogram_bins())
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let k = ((x - self.lo) / self.bin_width()) as usize;
        Some(k.min(self.counts.len() - 1))
    }

    /// Adds a sample; returns false if it falls outside the range.
    pub fn add(&mut self, x: f64) -> bool {
        match self.bin_of(x) {
            Some(k) => {
                self.counts[k] += 1;
                true
            }
            None => false,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn from_samples(lo: f64, hi: f64, bins: usize, samples: &[f64]) -> Self {
        let mut h = Histogram::new(lo, hi, bins);
        for &x in samples {
            h.add(x);
        }
        h
    }
}

/// Fringe visibility `(I_max - I_min) / (I_max + I_min)` of a histogram.
///
/// Bin intensities are folded modulo the fringe period onto at most 50 phase
/// bins and smoothed with a circular 3-bin average before taking extremes.
pub fn fringe_visibility(hist: &Histogram, cfg: &OpticsConfig) -> Result<f64> {
    if hist.bins() < 20 {
        return Err(SimError::invariant(
            "fringe_visibility needs at least 20 bins",
        ));
    }
    if hist.total() == 0 {
        return Err(SimError::EmptyInput("histogram has no counts"));
    }
    let intensities: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    visibility_from_intensities(hist.lo, hist.hi, &intensities, cfg.fringe_scale())
}

/// Visibility of arbitrary nonnegative bin intensities over `[lo, hi]`.
pub fn visibility_from_intensities(
    lo: f64,
    hi: f64,
    intensities: &[f64],
    period: f64,
) -> Result<f64> {
    let bins = intensities.len();
    if bins < 20 {
        return Err(SimError::invariant(
            "fringe_visibility needs at least 20 bins",
        ));
    }
    let width = (hi - lo) / bins as f64;
    let periods = (hi - lo) / period;
    let phase_bins = ((bins as f64 / periods).round() as usize).clamp(4, BINS_PER_PERIOD);

    let mut sum = vec![0.0; phase_bins];
    let mut n = vec![0usize; phase_bins];
    for (i, &v) in intensities.iter().enumerate() {
        let center = lo + (i as f64 + 0.5) * width;
        let phase = (center / period).rem_euclid(1.0);
        let k = ((phase * phase_bins as f64) as usize).min(phase_bins - 1);
        sum[k] += v;
        n[k] += 1;
    }
    let folded: Vec<f64> = sum
        .iter()
        .zip(&n)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let m = folded.len();
    let smoothed: Vec<f64> = (0..m)
        .map(|i| (folded[(i + m - 1) % m] + folded[i] + folded[(i + 1) % m]) / 3.0)
        .collect();
    let max = smoothed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = smoothed.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max + min > 0.0) {
        return Err(SimError::EmptyInput("histogram has no intensity"));
    }
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}
