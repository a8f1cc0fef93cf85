//! Protocols where which-way data is detected but its availability is
//! manipulated: never recorded, destroyed, or kept on perishable media.

use rand::seq::index;
use rand::Rng;

use super::engine::{
    count_coincidences, generate, new_event, no_samples, route_idler, Assembly, PatternBank,
    SplitLaw, Timeline,
};
use super::events::Detector;
use super::result::{RunOutcome, RunOutput};
use super::{DetectNoRecordVariant, PairingMode, PerishableSemantics, ProtocolConfig};
use crate::error::Result;
use crate::models::{available_for, AvailabilityRecord, Medium};
use crate::optics::PatternKind;
use crate::rng::run_stream;
use crate::stats::{optimal_interval_set, tv_distance, FeasibilityReport, FEASIBILITY_TOL};

pub(super) fn run_detect_no_record(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let anti = cfg.anti_fringe_phase_rad;
    let variant = cfg.detect_no_record_variant;
    let events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        let phase = match variant {
            DetectNoRecordVariant::SlitDetectors => {
                ev.availability =
                    AvailabilityRecord::detected_on(Medium::None, ev.t_created, t.observation(i));
                0.0
            }
            DetectNoRecordVariant::CounterRemoved | DetectNoRecordVariant::D3D4ChannelsOff => {
                let det = route_idler(&mut ev, rt);
                if !det.erases() {
                    ev.availability = AvailabilityRecord::detected_on(
                        Medium::None,
                        ev.t_detector,
                        t.observation(i),
                    );
                }
                if det == Detector::D2 {
                    anti
                } else {
                    0.0
                }
            }
        };
        bank.render_into(cfg, &mut ev, phase, imp);
        Ok(ev)
    })?;

    let pooled_wave = [(0.75, 0.0), (0.25, anti)];
    let mut asm = Assembly::new(cfg);
    match variant {
        DetectNoRecordVariant::SlitDetectors => {
            asm.define("D0", false, &[(1.0, 0.0)]);
            for e in &events {
                asm.push("D0", e.signal_x.unwrap_or_default(), e.slit);
            }
        }
        DetectNoRecordVariant::CounterRemoved => {
            asm.define("D0", false, &pooled_wave);
            for e in &events {
                asm.push("D0", e.signal_x.unwrap_or_default(), e.slit);
            }
        }
        DetectNoRecordVariant::D3D4ChannelsOff => {
            let (matches, summary) =
                count_coincidences(cfg, &events, &[Detector::D1, Detector::D2]);
            asm.define("D1", false, &[(1.0, 0.0)])
                .define("D2", false, &[(1.0, anti)])
                .define("unsorted", false, &[(1.0, 0.0)])
                .define("D0", true, &pooled_wave);
            for (e, r) in events.iter().zip(&matches.records) {
                let x = e.signal_x.unwrap_or_default();
                asm.push("D0", x, e.slit);
                asm.push(r.detector.map_or("unsorted", |d| d.name()), x, e.slit);
            }
            asm.coincidence = Some(summary);
            asm.compare("D1", "D2");
        }
    }
    asm.finish(events)
}

pub(super) fn run_macroscopic_erasure(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let exact_half: Option<Vec<bool>> = match cfg.pairing_mode {
        PairingMode::IndependentCoinFlips => None,
        PairingMode::ExactHalfSubset => {
            let n = cfg.n_pairs as usize;
            let mut mask = vec![false; n];
            for k in index::sample(&mut run_stream(cfg.seed, 1), n, n / 2) {
                mask[k] = true;
            }
            Some(mask)
        }
    };
    let events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        let destroyed = match &exact_half {
            Some(mask) => mask[i as usize],
            None => rt.gen_bool(cfg.destruction_prob),
        };
        let mut rec =
            AvailabilityRecord::detected_on(Medium::Persistent, ev.t_created, t.observation(i));
        if destroyed {
            rec = rec.with_erasure(t.erasure(i));
        }
        ev.availability = rec;
        ev.erased = Some(destroyed);
        bank.render_into(cfg, &mut ev, 0.0, imp);
        Ok(ev)
    })?;

    let mut asm = Assembly::new(cfg);
    asm.define("destroyed", false, &[(1.0, 0.0)])
        .define("surviving", false, &[(1.0, 0.0)])
        .define("D0", true, &[(1.0, 0.0)]);
    for e in &events {
        let x = e.signal_x.unwrap_or_default();
        asm.push(
            if e.erased == Some(true) {
                "destroyed"
            } else {
                "surviving"
            },
            x,
            e.slit,
        );
        asm.push("D0", x, e.slit);
    }
    asm.compare("destroyed", "surviving");
    asm.finish(events)
}

pub(super) fn run_perishable_media(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let rule = match &cfg.recording_rule {
        Some(r) => r.clone(),
        None => optimal_interval_set(&cfg.optics)?,
    };
    let unrecorded_medium = match cfg.perishable_semantics {
        PerishableSemantics::Objective => Medium::Perishable {
            ttl_s: cfg.perishable_ttl_s,
        },
        PerishableSemantics::SubjectiveDistinct => Medium::Volatile,
    };
    let record = |i: u64, medium: Medium| {
        AvailabilityRecord::detected_on(medium, t.created(i), t.observation(i))
    };
    // Both branch laws are fixed by relative timing alone, so pair 0 decides them.
    let law_of = |medium: Medium| {
        if available_for(&record(0, medium), &cfg.model, t.signal(0)) {
            &bank.particle
        } else {
            &bank.wave
        }
    };
    let law_in = law_of(Medium::Persistent);
    let law_out = law_of(unrecorded_medium);

    let mut asm = Assembly::new(cfg);
    asm.define("recorded", false, &[(1.0, 0.0)])
        .define("perished", false, &[(1.0, 0.0)])
        .define("D0", true, &[(1.0, 0.0)])
        .within("recorded", rule.clone())
        .within("perished", rule.complement(&cfg.optics));
    asm.compare("recorded", "perished");

    let split = if law_in.kind() == law_out.kind() {
        if law_in.kind() == PatternKind::Particle {
            asm.flag("branch_a_no_objective_subjective_difference");
        }
        None
    } else {
        let split = SplitLaw::new(&rule, law_in, law_out);
        let report = FeasibilityReport {
            interval_set: rule.clone(),
            delta_value: split.delta,
            tv_value: tv_distance(&cfg.optics)?,
            margin: 1.0 - split.delta,
            feasible_under_outcome_i: (split.delta - 1.0).abs() <= FEASIBILITY_TOL,
        };
        if split.delta < cfg.noise_threshold {
            return Ok(no_samples(
                cfg,
                RunOutcome::IntentAdjustmentRequired,
                Some(report),
                vec!["branch_b_intent_adjustment_required".into()],
            ));
        }
        if !report.feasible_under_outcome_i {
            asm.flag("statistically_indistinguishable");
        }
        Some((split, report))
    };

    let events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        let x = match &split {
            Some((law, _)) => law.sample(imp)?,
            None => law_in.sample(imp),
        };
        let inside = rule.contains(x);
        let dist = if inside { law_in } else { law_out };
        ev.signal_x = Some(x);
        ev.rendered = Some(dist.kind());
        ev.erased = Some(!inside);
        ev.availability = record(
            i,
            if inside {
                Medium::Persistent
            } else {
                unrecorded_medium
            },
        );
        Ok(ev)
    })?;

    for e in &events {
        let x = e.signal_x.unwrap_or_default();
        asm.push(
            if e.erased == Some(false) {
                "recorded"
            } else {
                "perished"
            },
            x,
            e.slit,
        );
        asm.push("D0", x, e.slit);
    }
    let mut out = asm.finish(events)?;
    out.result.feasibility = split.map(|(_, r)| r);
    Ok(out)
}
