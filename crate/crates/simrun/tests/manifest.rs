use eraser_sim::protocols::{
    ObservationSchedule, OutcomeHypothesis, PairingMode, SwitchStage, SwitchStrategy,
};
use eraser_sim::{IntervalSet, ProtocolConfig, ProtocolKind, RenderingModel};
use proptest::prelude::*;
use simrun::{
    parse_manifest, serialize_manifest, ManifestError, ReportFormat, RunEntry, RunManifest,
};

#[test]
fn minimal_manifest() {
    let m = parse_manifest(r#"{"runs": [{"name": "ds", "config": {"protocol": "double_slit"}}]}"#)
        .unwrap();
    assert_eq!(m.runs.len(), 1);
    assert_eq!(
        m.runs[0].config,
        ProtocolConfig::new(ProtocolKind::DoubleSlit)
    );
    assert!(m.wants(ReportFormat::Csv));
}

#[test]
fn window_not_below_delta_t_is_rejected() {
    let text = r#"{"runs": [{"name": "ds", "config": {
        "protocol": "double_slit", "delta_t_s": 1e-8, "coincidence_window_s": 1e-8}}]}"#;
    match parse_manifest(text) {
        Err(ManifestError::Invariant(msg)) => {
            assert!(msg.contains("coincidence_window_s < delta_t_s"), "{msg}")
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn exact_half_with_odd_pairs_is_rejected() {
    let text = r#"{"runs": [{"name": "m", "config": {
        "protocol": "macroscopic_erasure", "pairing_mode": "exact_half_subset", "n_pairs": 101}}]}"#;
    match parse_manifest(text) {
        Err(ManifestError::Invariant(msg)) => assert!(msg.contains("even"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_key_reports_its_path() {
    let text = r#"{"runs": [{"name": "ds", "config": {"protocol": "double_slit",
        "optics": {"wavelength_m": 5e-7, "colour": "green"}}}]}"#;
    match parse_manifest(text) {
        Err(ManifestError::Schema { path, message }) => {
            assert_eq!(path, "runs[0].config.optics.colour");
            assert!(message.contains("colour"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn manifest_level_invariants() {
    let empty = r#"{"runs": []}"#;
    assert!(matches!(
        parse_manifest(empty),
        Err(ManifestError::Invariant(_))
    ));
    let dup = r#"{"runs": [{"name": "x", "config": {"protocol": "double_slit"}},
                          {"name": "x", "config": {"protocol": "delayed_choice"}}]}"#;
    assert!(
        matches!(parse_manifest(dup), Err(ManifestError::Invariant(m)) if m.contains("unique"))
    );
    let bad_name = r#"{"runs": [{"name": "../x", "config": {"protocol": "double_slit"}}]}"#;
    assert!(parse_manifest(bad_name).is_err());
    let fmt =
        r#"{"runs": [{"name": "x", "config": {"protocol": "double_slit"}}], "formats": ["png"]}"#;
    assert!(
        matches!(parse_manifest(fmt), Err(ManifestError::Schema { path, .. }) if path == "formats[0]")
    );
}

fn config_strategy() -> impl Strategy<Value = ProtocolConfig> {
    (
        0usize..8,
        any::<bool>(),
        1u64..5000,
        any::<u64>(),
        prop_oneof![Just(1e-8), Just(60.0)],
        0usize..4,
        prop::collection::vec(-4e-3f64..4e-3, 0..6),
    )
        .prop_map(|(kind, raa, n, seed, dt, stage, mut pts)| {
            let kinds = [
                ProtocolKind::DoubleSlit,
                ProtocolKind::DelayedChoice,
                ProtocolKind::QuantumEraser,
                ProtocolKind::DetectNoRecord,
                ProtocolKind::MacroscopicErasure,
                ProtocolKind::PredictorExperiment,
                ProtocolKind::SwitchParadox,
                ProtocolKind::PerishableMedia,
            ];
            let model = if raa {
                RenderingModel::render_at_availability()
            } else {
                RenderingModel::collapse_at_detection()
            };
            let mut cfg = ProtocolConfig::new(kinds[kind])
                .with_model(model)
                .with_pairs(2 * n)
                .with_seed(seed)
                .with_delta_t(dt);
            cfg.switch_stage = [
                SwitchStage::A,
                SwitchStage::B,
                SwitchStage::C,
                SwitchStage::D,
            ][stage];
            if kind == 4 {
                cfg.pairing_mode = PairingMode::ExactHalfSubset;
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            pts.truncate(pts.len() / 2 * 2);
            let set = IntervalSet::new(pts.chunks(2).map(|c| (c[0], c[1])).collect()).unwrap();
            if stage == 3 {
                cfg.strategy = Some(SwitchStrategy::Strategy1 { interval_set: set });
                cfg.outcome_hypothesis = Some(OutcomeHypothesis::I);
                cfg.observation_schedule = ObservationSchedule::AtT0;
            } else if kind == 7 {
                cfg.recording_rule = Some(set);
            }
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn round_trip(configs in prop::collection::vec(config_strategy(), 1..4), seed in any::<Option<u64>>()) {
        let runs = configs.into_iter().enumerate().map(|(i, config)| RunEntry { name: format!("run{i}"), config }).collect();
        let mut m = RunManifest::new(runs);
        m.seed = seed;
        m.formats = vec![ReportFormat::Json, ReportFormat::Ascii];
        prop_assert_eq!(parse_manifest(&serialize_manifest(&m)).unwrap(), m);
    }
}
