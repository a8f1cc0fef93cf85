//! The built-in acceptance manifest.

use eraser_sim::protocols::{
    ObservationSchedule, OutcomeHypothesis, SwitchStage, SwitchStrategy, LONG_DELTA_T_S,
    SHORT_DELTA_T_S,
};
use eraser_sim::{
    optimal_interval_set, IntervalSet, OpticsConfig, ProtocolConfig, ProtocolKind, RenderingModel,
};

use crate::manifest::{ReportFormat, RunEntry, RunManifest};

pub const DEFAULT_SEED: u64 = 20_240_601;

pub const PREDICTOR_PAIRS: u64 = 1_000_000;
pub const ERASER_PAIRS: u64 = 400_000;
pub const DISCRIMINATION_PAIRS: u64 = 100_000;
pub const SWITCH_PAIRS: u64 = 50_000;

fn models() -> [(&'static str, RenderingModel); 2] {
    [
        ("cad", RenderingModel::collapse_at_detection()),
        ("raa", RenderingModel::render_at_availability()),
    ]
}

fn stage_d(strategy: SwitchStrategy) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(ProtocolKind::SwitchParadox).with_pairs(SWITCH_PAIRS);
    cfg.switch_stage = SwitchStage::D;
    cfg.observation_schedule = ObservationSchedule::AtT0;
    cfg.outcome_hypothesis = Some(OutcomeHypothesis::I);
    cfg.strategy = Some(strategy);
    cfg
}

/// Name of the stage (a)-(c) run for a stage letter and Δt preset.
pub fn stage_run_name(stage: SwitchStage, long_delta_t: bool) -> String {
    let s = match stage {
        SwitchStage::A => "a",
        SwitchStage::B => "b",
        SwitchStage::C => "c",
        SwitchStage::D => "d",
    };
    format!("switch_{s}_{}", if long_delta_t { "long" } else { "short" })
}

/// Every protocol run the acceptance criteria read from. Event logs are
/// left out to keep the suite small; `--formats` can add them back.
pub fn acceptance_manifest(seed: u64) -> RunManifest {
    let optics = OpticsConfig::default();
    let mut runs = Vec::new();
    let mut push = |name: String, cfg: ProtocolConfig| {
        runs.push(RunEntry {
            name,
            config: cfg.with_seed(seed),
        })
    };

    push(
        "predictor".into(),
        ProtocolConfig::new(ProtocolKind::PredictorExperiment)
            .with_model(RenderingModel::render_at_availability())
            .with_pairs(PREDICTOR_PAIRS),
    );
    push(
        "eraser".into(),
        ProtocolConfig::new(ProtocolKind::QuantumEraser).with_pairs(ERASER_PAIRS),
    );
    let cores = optimal_interval_set(&optics).expect("default optics are valid");
    push(
        "switch_d_optimal".into(),
        stage_d(SwitchStrategy::Strategy1 {
            interval_set: cores,
        }),
    );
    push(
        "switch_d_empty".into(),
        stage_d(SwitchStrategy::Strategy1 {
            interval_set: IntervalSet::empty(),
        }),
    );
    push(
        "switch_d_window".into(),
        stage_d(SwitchStrategy::Strategy1 {
            interval_set: IntervalSet::full(&optics),
        }),
    );
    for (tag, model) in models() {
        push(
            format!("detect_no_record_{tag}"),
            ProtocolConfig::new(ProtocolKind::DetectNoRecord)
                .with_model(model)
                .with_pairs(DISCRIMINATION_PAIRS),
        );
        push(
            format!("macroscopic_{tag}"),
            ProtocolConfig::new(ProtocolKind::MacroscopicErasure)
                .with_model(model)
                .with_pairs(DISCRIMINATION_PAIRS),
        );
    }
    for stage in [SwitchStage::A, SwitchStage::B, SwitchStage::C] {
        for long in [false, true] {
            let mut cfg = ProtocolConfig::new(ProtocolKind::SwitchParadox)
                .with_pairs(SWITCH_PAIRS)
                .with_delta_t(if long {
                    LONG_DELTA_T_S
                } else {
                    SHORT_DELTA_T_S
                });
            cfg.switch_stage = stage;
            push(stage_run_name(stage, long), cfg);
        }
    }

    let mut m = RunManifest::new(runs);
    m.output_dir = "simrun-acceptance".into();
    m.formats = vec![ReportFormat::Json, ReportFormat::Ascii];
    m
}
