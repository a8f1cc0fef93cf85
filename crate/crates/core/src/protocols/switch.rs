//! The staged switch experiment.
//!
//! Stages (a)-(c) never make which-way available at observation time. Stage
//! (d) observes the impact at T = 0 and simulates each outcome hypothesis as
//! a generative law.

use super::engine::{generate, new_event, no_samples, Assembly, PatternBank, SplitLaw, Timeline};
use super::events::PhotonPairEvent;
use super::result::{RunOutcome, RunOutput};
use super::{OutcomeHypothesis, ProtocolConfig, SwitchStage, SwitchStrategy};
use crate::error::Result;
use crate::models::{AvailabilityRecord, Medium, RenderingPolicy};
use crate::optics::PatternDistribution;
use crate::stats::contradiction_margin;

pub(super) fn run_switch_experiment(cfg: &ProtocolConfig) -> Result<RunOutput> {
    match cfg.switch_stage {
        SwitchStage::A | SwitchStage::B | SwitchStage::C => run_manual(cfg),
        SwitchStage::D => run_hypothesis(cfg),
    }
}

fn switch_record(ev: &PhotonPairEvent, on: bool, observation: f64) -> AvailabilityRecord {
    if on {
        AvailabilityRecord::detected_on(Medium::Persistent, ev.t_detector, observation)
    } else {
        AvailabilityRecord::undetected(observation)
    }
}

/// Stages (a)-(c): transparent splitters or an impact-independent switch.
fn run_manual(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let on = cfg.switch_stage == SwitchStage::C
        && matches!(cfg.strategy, Some(SwitchStrategy::AlwaysOn));
    let events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        ev.availability = switch_record(&ev, on, t.observation(i));
        if cfg.switch_stage == SwitchStage::C {
            ev.switch_on = Some(on);
            ev.erased = Some(!on);
        }
        bank.render_into(cfg, &mut ev, 0.0, imp);
        Ok(ev)
    })?;
    let mut asm = Assembly::new(cfg);
    asm.define("switch_on", false, &[(1.0, 0.0)])
        .define("switch_off", false, &[(1.0, 0.0)])
        .define("D0", true, &[(1.0, 0.0)]);
    for e in &events {
        let x = e.signal_x.unwrap_or_default();
        asm.push(
            if e.switch_on == Some(true) {
                "switch_on"
            } else {
                "switch_off"
            },
            x,
            e.slit,
        );
        asm.push("D0", x, e.slit);
    }
    if cfg.microprocessor_switch {
        asm.flag("microprocessor_switch");
    }
    asm.finish(events)
}

enum Law<'a> {
    Fixed(&'a PatternDistribution),
    Split(Box<SplitLaw>),
}

/// Stage (d): impact observed at T = 0, switch decided afterwards.
fn run_hypothesis(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let strategy = cfg.strategy.clone().unwrap_or(SwitchStrategy::AlwaysOff);
    let hypothesis = cfg.outcome_hypothesis.unwrap_or(OutcomeHypothesis::I);
    let mut flags = Vec::new();
    if cfg.microprocessor_switch {
        flags.push("microprocessor_switch".to_string());
    }
    if hypothesis == OutcomeHypothesis::I
        && cfg.model.policy == RenderingPolicy::CollapseAtDetection
    {
        flags.push("outcome_i_is_collapse_at_detection_prediction".to_string());
    }

    let activation = strategy.activation_set(&cfg.optics)?;
    let mut feasibility = None;
    let law = match hypothesis {
        OutcomeHypothesis::Iv => {
            flags.push("discontinuity".to_string());
            return Ok(no_samples(cfg, RunOutcome::Discontinuity, None, flags));
        }
        OutcomeHypothesis::Ii => Law::Fixed(&bank.particle),
        OutcomeHypothesis::Iii => {
            flags.push("which_way_recordable_with_interference".to_string());
            Law::Fixed(&bank.wave)
        }
        OutcomeHypothesis::I => {
            let report = contradiction_margin(&activation, &cfg.optics)?;
            if report.delta_value < cfg.noise_threshold {
                flags.push("probabilities_do_not_sum_to_one".to_string());
                return Ok(no_samples(cfg, RunOutcome::Refused, Some(report), flags));
            }
            if !report.feasible_under_outcome_i {
                flags.push("statistically_indistinguishable".to_string());
            }
            feasibility = Some(report);
            Law::Split(Box::new(SplitLaw::new(
                &activation,
                &bank.particle,
                &bank.wave,
            )))
        }
    };

    let mut events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        let x = match &law {
            Law::Fixed(d) => d.sample(imp),
            Law::Split(s) => s.sample(imp)?,
        };
        ev.signal_x = Some(x);
        Ok(ev)
    })?;

    // The switch sees X_1..X_i, so decisions are made in pair order.
    let xs: Vec<f64> = events
        .iter()
        .map(|e| e.signal_x.unwrap_or_default())
        .collect();
    for (i, ev) in events.iter_mut().enumerate() {
        let on = strategy.activates(xs[i], &xs[..=i], &cfg.optics);
        ev.switch_on = Some(on);
        ev.erased = Some(!on);
        ev.availability = switch_record(ev, on, t.observation(ev.pair_id));
        let dist = match &law {
            Law::Fixed(d) => *d,
            Law::Split(_) if on => &bank.particle,
            Law::Split(_) => &bank.wave,
        };
        ev.rendered = Some(dist.kind());
    }

    let mut asm = Assembly::new(cfg);
    asm.define("switch_on", false, &[(1.0, 0.0)])
        .define("switch_off", false, &[(1.0, 0.0)])
        .define("D0", true, &[(1.0, 0.0)]);
    if !activation.is_empty() {
        asm.within("switch_on", activation.clone());
    }
    let off_region = activation.complement(&cfg.optics);
    if !off_region.is_empty() {
        asm.within("switch_off", off_region);
    }
    for e in &events {
        let x = e.signal_x.unwrap_or_default();
        asm.push(
            if e.switch_on == Some(true) {
                "switch_on"
            } else {
                "switch_off"
            },
            x,
            e.slit,
        );
        asm.push("D0", x, e.slit);
    }
    asm.compare("switch_on", "switch_off");
    asm.flags = flags;
    let mut out = asm.finish(events)?;
    out.result.feasibility = feasibility;
    Ok(out)
}
