//! Predicting the later erasure flag R from the impact position X.
//!
//! Under `RenderAtAvailability` the run draws from the law the model needs
//! for a successful experiment: R is a fair coin, X is particle-distributed
//! given R = 1 and interference-distributed given R = 0. Under
//! `CollapseAtDetection` the idler follows the ordinary eraser routing.

use rand::Rng;

use super::engine::{generate, impact, new_event, route_idler, Assembly, PatternBank, Timeline};
use super::events::{Detector, PhotonPairEvent, Slit, Splitter, SplitterDecision, SplitterOutcome};
use super::result::{PosteriorBin, PredictorSummary, RunOutput};
use super::ProtocolConfig;
use crate::error::Result;
use crate::models::{AvailabilityRecord, Medium, RenderingPolicy};
use crate::optics::{PatternDistribution, BINS_PER_PERIOD};
use crate::stats::{approx_posterior, tv_distance};

fn route_by_coin(ev: &mut PhotonPairEvent, recorded: bool) -> Detector {
    let first = match ev.slit {
        Slit::Slit1 => Splitter::BsA,
        Slit::Slit2 => Splitter::BsB,
    };
    let det = if recorded {
        ev.idler_route.push(SplitterDecision {
            splitter: first,
            outcome: SplitterOutcome::Reflect,
        });
        match ev.slit {
            Slit::Slit1 => Detector::D3,
            Slit::Slit2 => Detector::D4,
        }
    } else {
        ev.idler_route.push(SplitterDecision {
            splitter: first,
            outcome: SplitterOutcome::Transmit,
        });
        ev.idler_route.push(SplitterDecision {
            splitter: Splitter::BsC,
            outcome: SplitterOutcome::Reflect,
        });
        Detector::D1
    };
    ev.detector = Some(det);
    ev.erased = Some(!recorded);
    det
}

pub(super) fn run_predictor(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let anti = cfg.anti_fringe_phase_rad;
    let successful_law = cfg.model.policy == RenderingPolicy::RenderAtAvailability;
    let events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        let det = if successful_law {
            let recorded = rt.gen_bool(0.5);
            route_by_coin(&mut ev, recorded)
        } else {
            route_idler(&mut ev, rt)
        };
        if !det.erases() {
            ev.availability = AvailabilityRecord::detected_on(
                Medium::Persistent,
                ev.t_detector,
                t.observation(i),
            );
        }
        let dist = match det {
            Detector::D3 | Detector::D4 => &bank.particle,
            Detector::D1 => &bank.wave,
            Detector::D2 => &bank.anti,
        };
        impact(&mut ev, dist, imp);
        Ok(ev)
    })?;

    let erased_wave: &[(f64, f64)] = if successful_law {
        &[(1.0, 0.0)]
    } else {
        &[(0.5, 0.0), (0.5, anti)]
    };
    let mut asm = Assembly::new(cfg);
    asm.define("recorded", false, &[(1.0, 0.0)])
        .define("erased", false, erased_wave)
        .define("D0", true, &[(1.0, 0.0)]);
    for e in &events {
        let x = e.signal_x.unwrap_or_default();
        asm.push(
            if e.erased == Some(false) {
                "recorded"
            } else {
                "erased"
            },
            x,
            e.slit,
        );
        asm.push("D0", x, e.slit);
    }
    asm.compare("recorded", "erased");
    if successful_law {
        asm.flag("successful_experiment_law");
    }
    let summary = summarize(cfg, &bank.particle, &bank.wave, &events)?;
    let mut out = asm.finish(events)?;
    out.result.predictor = Some(summary);
    Ok(out)
}

/// Posterior `P[R=1 | X]` folded onto phase bins of width a/50, plus the
/// hit rate of the threshold rule.
fn summarize(
    cfg: &ProtocolConfig,
    particle: &PatternDistribution,
    wave: &PatternDistribution,
    events: &[PhotonPairEvent],
) -> Result<PredictorSummary> {
    let optics = &cfg.optics;
    let (lo, hi) = optics.window();
    let a = optics.fringe_scale();
    let nb = BINS_PER_PERIOD;
    let phase_bin = |x: f64| ((((x - lo) / a).rem_euclid(1.0)) * nb as f64) as usize % nb;

    let mut count = vec![0u64; nb];
    let mut recorded = vec![0u64; nb];
    let mut hits = 0u64;
    for e in events {
        let x = e.signal_x.unwrap_or_default();
        let r1 = e.erased == Some(false);
        let k = phase_bin(x);
        count[k] += 1;
        recorded[k] += r1 as u64;
        if (approx_posterior(x, optics) > 0.5) == r1 {
            hits += 1;
        }
    }

    let copies = ((hi - lo) / a).ceil() as usize + 1;
    let mut bins = Vec::with_capacity(nb);
    let mut max_abs_error: f64 = 0.0;
    let mut dark_bin_min: Option<f64> = None;
    let mut weighted_err = 0.0;
    for k in 0..nb {
        let (f0, f1) = (k as f64 / nb as f64, (k + 1) as f64 / nb as f64);
        let (mut mp, mut mw) = (0.0, 0.0);
        for j in 0..copies {
            let b0 = (lo + (j as f64 + f0) * a).min(hi);
            let b1 = (lo + (j as f64 + f1) * a).min(hi);
            mp += particle.cdf_at(b1) - particle.cdf_at(b0);
            mw += wave.cdf_at(b1) - wave.cdf_at(b0);
        }
        let exact = if mp + mw > 0.0 { mp / (mp + mw) } else { 0.5 };
        let empirical = (count[k] > 0).then(|| recorded[k] as f64 / count[k] as f64);
        if let Some(emp) = empirical {
            let err = (emp - exact).abs();
            max_abs_error = max_abs_error.max(err);
            weighted_err += err * count[k] as f64;
            let centre = lo + 0.5 * (f0 + f1) * a;
            if (std::f64::consts::PI * centre / a).cos().abs() < 0.05 {
                dark_bin_min = Some(dark_bin_min.map_or(emp, |m: f64| m.min(emp)));
            }
        }
        bins.push(PosteriorBin {
            phase_lo: f0,
            phase_hi: f1,
            count: count[k],
            recorded: recorded[k],
            empirical,
            exact,
        });
    }
    let n = events.len().max(1) as f64;
    Ok(PredictorSummary {
        bins,
        max_abs_error,
        dark_bin_min,
        accuracy: hits as f64 / n,
        reference_accuracy: 0.5 * (1.0 + tv_distance(optics)?),
        calibration_error: weighted_err / n,
    })
}
