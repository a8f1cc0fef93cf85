//! Posterior curves, δ(I), total variation, pattern classification and
//! sample-size planning for the wave-versus-particle question.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::optics::{Histogram, ImpactDensity, IntervalSet, OpticsConfig, PatternDistribution};
use crate::quad;

/// δ(I) below this value is treated as a contradiction robust to noise.
pub const DEFAULT_NOISE_THRESHOLD: f64 = 0.9;
/// |δ(I) - 1| within this is "consistent with total probability one".
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Densities are floored at `DENSITY_FLOOR / W` inside log-likelihoods.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Log posterior odds 999:1 under equal priors.
pub fn default_llr_threshold() -> f64 {
    999f64.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosteriorMode {
    /// `1 / (1 + w(x)/p(x))` with the configured densities.
    Exact,
    /// `1 / (1 + 2 cos²(πx/a))`.
    Approximate,
}

/// `P[R = 1 | X = x]` with prior `P[R = 1] = 1/2`, particle law given R = 1
/// and interference law given R = 0.
#[derive(Debug, Clone)]
pub struct PosteriorCurve {
    mode: PosteriorMode,
    wave: PatternDistribution,
    particle: PatternDistribution,
}

impl PosteriorCurve {
    pub fn new(cfg: &OpticsConfig, mode: PosteriorMode) -> Result<Self> {
        Ok(PosteriorCurve {
            mode,
            wave: PatternDistribution::wave(cfg, 0.0)?,
            particle: PatternDistribution::particle(cfg)?,
        })
    }

    pub fn mode(&self) -> PosteriorMode {
        self.mode
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.wave.config().check_in_window(x)?;
        Ok(self.value_at(x))
    }

    pub(crate) fn value_at(&self, x: f64) -> f64 {
        match self.mode {
            PosteriorMode::Exact => 1.0 / (1.0 + self.wave.pdf(x) / self.particle.pdf(x)),
            PosteriorMode::Approximate => eq2(x, self.wave.config().fringe_scale()),
        }
    }
}

fn eq2(x: f64, a: f64) -> f64 {
    let c = (PI * x / a).cos();
    1.0 / (1.0 + 2.0 * c * c)
}

pub fn exact_posterior(x: f64, cfg: &OpticsConfig) -> Result<f64> {
    PosteriorCurve::new(cfg, PosteriorMode::Exact)?.value(x)
}

pub fn approx_posterior(x: f64, cfg: &OpticsConfig) -> f64 {
    eq2(x, cfg.fringe_scale())
}

/// `δ(I) = P_particle[X ∈ I] + P_wave[X ∉ I]`.
pub fn delta_of_interval_set(set: &IntervalSet, cfg: &OpticsConfig) -> Result<f64> {
    set.validate_within(cfg)?;
    let particle = PatternDistribution::particle(cfg)?;
    let wave = PatternDistribution::wave(cfg, 0.0)?;
    Ok(delta_with(set, &particle, &wave))
}

pub(crate) fn delta_with(
    set: &IntervalSet,
    particle: &PatternDistribution,
    wave: &PatternDistribution,
) -> f64 {
    particle.probability(set) + (1.0 - wave.probability(set))
}

/// Points where the interference density crosses the particle density.
fn crossings(particle: &PatternDistribution, wave: &PatternDistribution) -> Vec<f64> {
    let cfg = wave.config();
    let (lo, hi) = cfg.window();
    let a = cfg.fringe_scale();
    if !cfg.envelope_enabled {
        let t2 = particle.pdf(0.0) / wave.normalization();
        if t2 >= 1.0 {
            return Vec::new();
        }
        let theta = t2.sqrt().acos();
        let half = theta * a / PI;
        let k0 = (lo / a).floor() as i64 - 1;
        let k1 = (hi / a).ceil() as i64 + 1;
        let mut out: Vec<f64> = (k0..=k1)
            .flat_map(|k| [k as f64 * a - half, k as f64 * a + half])
            .filter(|&x| x > lo && x < hi)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        return out;
    }
    let g = |x: f64| wave.pdf(x) - particle.pdf(x);
    let n = ((400.0 * cfg.fringe_periods()).ceil() as usize).max(4000);
    let step = (hi - lo) / n as f64;
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut g0 = g(x0);
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + i as f64 * step };
        let g1 = g(x1);
        if (g0 > 0.0) != (g1 > 0.0) {
            let (mut l, mut r) = (x0, x1);
            for _ in 0..100 {
                let m = 0.5 * (l + r);
                if (g(m) > 0.0) == (g0 > 0.0) {
                    l = m;
                } else {
                    r = m;
                }
            }
            out.push(0.5 * (l + r));
        }
        x0 = x1;
        g0 = g1;
    }
    out
}

fn segments(cfg: &OpticsConfig, cuts: &[f64]) -> Vec<(f64, f64)> {
    let (lo, hi) = cfg.window();
    let mut pts = Vec::with_capacity(cuts.len() + 2);
    pts.push(lo);
    pts.extend_from_slice(cuts);
    pts.push(hi);
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect()
}

/// Total variation distance `½∫|p - w|` between the particle and
/// interference laws.
pub fn tv_distance(cfg: &OpticsConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.closed_form() {
        return Ok(1.0 / PI);
    }
    let particle = PatternDistribution::particle(cfg)?;
    let wave = PatternDistribution::wave(cfg, 0.0)?;
    let cuts = crossings(&particle, &wave);
    let segs = segments(cfg, &cuts);
    let tol = quad::DEFAULT_TOL / segs.len() as f64;
    Ok(0.5
        * segs
            .iter()
            .map(|&(a, b)| {
                quad::adaptive_simpson(|x| (particle.pdf(x) - wave.pdf(x)).abs(), a, b, tol)
            })
            .sum::<f64>())
}

/// `I* = {x : w(x) > p(x)}`, the bright-fringe cores. Minimizes δ, with
/// `δ(I*) = 1 - TV`.
pub fn optimal_interval_set(cfg: &OpticsConfig) -> Result<IntervalSet> {
    let particle = PatternDistribution::particle(cfg)?;
    let wave = PatternDistribution::wave(cfg, 0.0)?;
    let cuts = crossings(&particle, &wave);
    let chosen = segments(cfg, &cuts)
        .into_iter()
        .filter(|&(a, b)| {
            let m = 0.5 * (a + b);
            wave.pdf(m) > particle.pdf(m)
        })
        .collect();
    IntervalSet::new(chosen)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub interval_set: IntervalSet,
    pub delta_value: f64,
    pub tv_value: f64,
    /// `1 - δ(I)`; nonzero means total probability cannot be one.
    pub margin: f64,
    pub feasible_under_outcome_i: bool,
}

/// Checks whether "particle on I, interference off I" can be a probability law.
pub fn contradiction_margin(set: &IntervalSet, cfg: &OpticsConfig) -> Result<FeasibilityReport> {
    let delta = delta_of_interval_set(set, cfg)?;
    Ok(FeasibilityReport {
        interval_set: set.clone(),
        delta_value: delta,
        tv_value: tv_distance(cfg)?,
        margin: 1.0 - delta,
        feasible_under_outcome_i: (delta - 1.0).abs() <= FEASIBILITY_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Wave,
    Particle,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// `Σ log(w(x)/p(x))`, positive favours the interference law.
    pub log_likelihood_ratio: f64,
    pub samples: usize,
    pub threshold: f64,
}

/// Weighted mixture of interference laws, e.g. fringes plus anti-fringes.
#[derive(Debug, Clone)]
pub struct WaveMixture {
    components: Vec<(f64, PatternDistribution)>,
}

impl WaveMixture {
    /// `components` are `(weight, phase)`; weights are renormalized.
    pub fn new(cfg: &OpticsConfig, components: &[(f64, f64)]) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.is_empty() || !(total > 0.0) || components.iter().any(|c| !(c.0 >= 0.0)) {
            return Err(SimError::invariant(
                "wave mixture needs nonnegative weights with positive sum",
            ));
        }
        let components = components
            .iter()
            .map(|&(w, phase)| Ok((w / total, PatternDistribution::wave(cfg, phase)?)))
            .collect::<Result<_>>()?;
        Ok(WaveMixture { components })
    }

    pub fn single(cfg: &OpticsConfig, phase: f64) -> Result<Self> {
        WaveMixture::new(cfg, &[(1.0, phase)])
    }

    pub fn probability(&self, set: &IntervalSet) -> f64 {
        self.components
            .iter()
            .map(|(w, d)| w * d.probability(set))
            .sum()
    }
}

impl ImpactDensity for WaveMixture {
    fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|(w, d)| w * d.pdf(x)).sum()
    }
}

/// `Σ [log max(h1(x), floor) - log max(h0(x), floor)]`.
pub fn log_likelihood_ratio(
    samples: &[f64],
    h1: &dyn ImpactDensity,
    h0: &dyn ImpactDensity,
    floor: f64,
) -> f64 {
    samples
        .iter()
        .map(|&x| h1.pdf(x).max(floor).ln() - h0.pdf(x).max(floor).ln())
        .sum()
}

/// Likelihood-ratio test between an interference hypothesis and the
/// particle law.
#[derive(Debug, Clone)]
pub struct PatternClassifier {
    cfg: OpticsConfig,
    wave: WaveMixture,
    particle: PatternDistribution,
    threshold: f64,
}

impl PatternClassifier {
    pub fn new(cfg: &OpticsConfig) -> Result<Self> {
        PatternClassifier::with_wave(cfg, WaveMixture::single(cfg, 0.0)?)
    }

    pub fn with_wave(cfg: &OpticsConfig, wave: WaveMixture) -> Result<Self> {
        Ok(PatternClassifier {
            cfg: cfg.clone(),
            wave,
            particle: PatternDistribution::particle(cfg)?,
            threshold: default_llr_threshold(),
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn floor(&self) -> f64 {
        DENSITY_FLOOR / self.cfg.window_width()
    }

    pub fn log_likelihood_ratio(&self, samples: &[f64]) -> f64 {
        log_likelihood_ratio(samples, &self.wave, &self.particle, self.floor())
    }

    pub fn classify(&self, samples: &[f64]) -> Result<Classification> {
        if samples.is_empty() {
            return Err(SimError::EmptyInput("no samples to classify"));
        }
        if let Some(&x) = samples
            .iter()
            .find(|&&x| self.cfg.check_in_window(x).is_err())
        {
            self.cfg.check_in_window(x)?;
        }
        Ok(self.verdict(self.log_likelihood_ratio(samples), samples.len()))
    }

    /// Classifies samples selected by `X ∈ region` against both laws
    /// conditioned on the region; membership is the caller's business. Adds `n·log(P_p(region) / P_w(region))` to Λ.
    pub fn classify_within(&self, samples: &[f64], region: &IntervalSet) -> Result<Classification> {
        let (pp, pw) = (
            self.particle.probability(region),
            self.wave.probability(region),
        );
        if !(pp > 0.0 && pw > 0.0) {
            return Err(SimError::invariant(
                "conditioning region must have positive mass under both laws",
            ));
        }
        let base = self.classify(samples)?;
        let llr = base.log_likelihood_ratio + samples.len() as f64 * (pp / pw).ln();
        Ok(self.verdict(llr, samples.len()))
    }

    fn verdict(&self, llr: f64, samples: usize) -> Classification {
        let verdict = if llr > self.threshold {
            Verdict::Wave
        } else if llr < -self.threshold {
            Verdict::Particle
        } else {
            Verdict::Indeterminate
        };
        Classification {
            verdict,
            log_likelihood_ratio: llr,
            samples,
            threshold: self.threshold,
        }
    }
}

/// Classifies samples against the φ = 0 interference law with the default
/// threshold `log 999`.
pub fn classify_pattern(samples: &[f64], cfg: &OpticsConfig) -> Result<Classification> {
    PatternClassifier::new(cfg)?.classify(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizePlan {
    pub samples: u64,
    /// Bhattacharyya coefficient `∫√(p w)`.
    pub bhattacharyya: f64,
}

pub fn bhattacharyya_coefficient(cfg: &OpticsConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.closed_form() {
        return Ok(2.0 * std::f64::consts::SQRT_2 / PI);
    }
    let particle = PatternDistribution::particle(cfg)?;
    let wave = PatternDistribution::wave(cfg, 0.0)?;
    let (lo, hi) = cfg.window();
    let pieces = (64.0 * cfg.fringe_periods()).ceil() as usize;
    Ok(quad::piecewise_simpson(
        |x| (particle.pdf(x) * wave.pdf(x)).sqrt(),
        lo,
        hi,
        pieces,
        1e-12,
    ))
}

/// Smallest `n` with `½ρⁿ <= target_error`, bounding the equal-prior
/// maximum-likelihood error after `n` i.i.d. impacts.
pub fn required_sample_size(target_error: f64, cfg: &OpticsConfig) -> Result<SampleSizePlan> {
    if !(target_error > 0.0 && target_error < 0.5) {
        return Err(SimError::invariant("target_error must lie in (0, 1/2)"));
    }
    let rho = bhattacharyya_coefficient(cfg)?;
    if !(rho < 1.0) {
        return Err(SimError::invariant(
            "laws are indistinguishable (Bhattacharyya coefficient is 1)",
        ));
    }
    let bound = |n: u64| 0.5 * rho.powf(n as f64);
    let mut n = ((2.0 * target_error).ln() / rho.ln()).ceil().max(1.0) as u64;
    while n > 1 && bound(n - 1) <= target_error {
        n -= 1;
    }
    while bound(n) > target_error {
        n += 1;
    }
    Ok(SampleSizePlan {
        samples: n,
        bhattacharyya: rho,
    })
}

/// Binned total variation between two samples, on a common range spanning
/// both. Positively biased by roughly `O(√(bins/n))`.
pub fn tv_distance_empirical(samples_p: &[f64], samples_q: &[f64], bins: usize) -> Result<f64> {
    if samples_p.is_empty() || samples_q.is_empty() {
        return Err(SimError::EmptyInput(
            "empirical TV needs two nonempty samples",
        ));
    }
    let lo = samples_p
        .iter()
        .chain(samples_q)
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = samples_p
        .iter()
        .chain(samples_q)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = if hi > lo { hi } else { lo + 1.0 };
    tv_distance_empirical_in(samples_p, samples_q, bins, lo, hi)
}

/// Binned total variation over `[lo, hi]`; mass outside the range goes to a
/// shared overflow bin.
pub fn tv_distance_empirical_in(
    samples_p: &[f64],
    samples_q: &[f64],
    bins: usize,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if samples_p.is_empty() || samples_q.is_empty() {
        return Err(SimError::EmptyInput(
            "empirical TV needs two nonempty samples",
        ));
    }
    if bins < 10 {
        return Err(SimError::invariant("empirical TV needs at least 10 bins"));
    }
    let hp = Histogram::from_samples(lo, hi, bins, samples_p);
    let hq = Histogram::from_samples(lo, hi, bins, samples_q);
    let (np, nq) = (samples_p.len() as f64, samples_q.len() as f64);
    let inside: f64 = hp
        .counts
        .iter()
        .zip(&hq.counts)
        .map(|(&a, &b)| (a as f64 / np - b as f64 / nq).abs())
        .sum();
    let overflow = ((np - hp.total() as f64) / np - (nq - hq.total() as f64) / nq).abs();
    Ok(0.5 * (inside + overflow))
}

/// Empirical TV on the fringe-aligned window binning.
pub fn tv_distance_empirical_aligned(
    samples_p: &[f64],
    samples_q: &[f64],
    cfg: &OpticsConfig,
) -> Result<f64> {
    let (lo, hi) = cfg.window();
    tv_distance_empirical_in(samples_p, samples_q, cfg.histogram_bins(), lo, hi)
}
