//! Double slit, delayed choice and the four-detector quantum eraser.

use rand::Rng;

use super::engine::{
    count_coincidences, generate, new_event, route_idler, Assembly, PatternBank, Timeline,
};
use super::events::Detector;
use super::result::RunOutput;
use super::ProtocolConfig;
use crate::error::Result;
use crate::models::{AvailabilityRecord, Medium};

pub(super) fn run_double_slit(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        if cfg.detectors_recording {
            ev.availability =
                AvailabilityRecord::detected_on(Medium::Persistent, ev.t_created, t.observation(i));
            ev.erased = Some(false);
        }
        bank.render_into(cfg, &mut ev, 0.0, imp);
        Ok(ev)
    })?;

    let mut asm = Assembly::new(cfg);
    asm.define("D0", false, &[(1.0, 0.0)]);
    for e in &events {
        asm.push("D0", e.signal_x.unwrap_or_default(), e.slit);
    }
    asm.finish(events)
}

pub(super) fn run_delayed_choice(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        let record = rt.gen_bool(cfg.record_probability);
        ev.erased = Some(!record);
        if record {
            ev.availability = AvailabilityRecord::detected_on(
                Medium::Persistent,
                ev.t_detector,
                t.observation(i),
            );
        }
        bank.render_into(cfg, &mut ev, 0.0, imp);
        Ok(ev)
    })?;

    let mut asm = Assembly::new(cfg);
    asm.define("recorded", false, &[(1.0, 0.0)])
        .define("unrecorded", false, &[(1.0, 0.0)])
        .define("D0", true, &[(1.0, 0.0)]);
    for e in &events {
        let x = e.signal_x.unwrap_or_default();
        let name = if e.erased == Some(false) {
            "recorded"
        } else {
            "unrecorded"
        };
        asm.push(name, x, e.slit);
        asm.push("D0", x, e.slit);
    }
    asm.compare("recorded", "unrecorded");
    asm.finish(events)
}

pub(super) fn run_quantum_eraser(cfg: &ProtocolConfig) -> Result<RunOutput> {
    let t = Timeline::new(cfg);
    let bank = PatternBank::new(cfg)?;
    let anti = cfg.anti_fringe_phase_rad;
    let events = generate(cfg, |i, imp, rt| {
        let mut ev = new_event(&t, i, rt);
        let det = route_idler(&mut ev, rt);
        let phase = if det == Detector::D2 { anti } else { 0.0 };
        if !det.erases() {
            ev.availability = AvailabilityRecord::detected_on(
                Medium::Persistent,
                ev.t_detector,
                t.observation(i),
            );
        }
        bank.render_into(cfg, &mut ev, phase, imp);
        Ok(ev)
    })?;

    let (matches, summary) = count_coincidences(
        cfg,
        &events,
        &[Detector::D1, Detector::D2, Detector::D3, Detector::D4],
    );
    let mut asm = Assembly::new(cfg);
    asm.define("D1", false, &[(1.0, 0.0)])
        .define("D2", false, &[(1.0, anti)])
        .define("D3", false, &[(1.0, 0.0)])
        .define("D4", false, &[(1.0, 0.0)])
        .define("D0", true, &[(0.75, 0.0), (0.25, anti)])
        .with_purity("D3")
        .with_purity("D4");
    for (e, r) in events.iter().zip(&matches.records) {
        let x = e.signal_x.unwrap_or_default();
        asm.push("D0", x, e.slit);
        if let Some(d) = r.detector {
            asm.push(d.name(), x, e.slit);
        }
    }
    asm.unmatched = summary.unmatched;
    if summary.mismatch_rate > 0.01 {
        asm.warnings.push(format!(
            "coincidence mismatch rate {:.4} exceeds 1%",
            summary.mismatch_rate
        ));
    }
    asm.coincidence = Some(summary);
    asm.compare("D1", "D3");
    asm.finish(events)
}
