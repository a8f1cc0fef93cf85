use std::f64::consts::PI;

use eraser_sim::rng::replicate_stream;
use eraser_sim::stats::tv_distance_empirical_aligned;
use eraser_sim::{
    approx_posterior, bhattacharyya_coefficient, contradiction_margin, delta_of_interval_set,
    exact_posterior, optimal_interval_set, required_sample_size, sample_impact, tv_distance,
    IntervalSet, OpticsConfig, PatternClassifier, PatternDistribution, Verdict,
};
use proptest::prelude::*;
use rand::Rng;

fn grid_integral(cfg: &OpticsConfig, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = cfg.screen_halfwidth_m;
    let step = 2.0 * h / n as f64;
    (0..n).map(|k| f(-h + (k as f64 + 0.5) * step) * step).sum()
}

fn densities(cfg: &OpticsConfig) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let w = 2.0 * cfg.screen_halfwidth_m;
    let a = cfg.wavelength_m * cfg.slit_screen_distance_m / cfg.slit_separation_m;
    (
        move |_x: f64| 1.0 / w,
        move |x: f64| 2.0 / w * (PI * x / a).cos().powi(2),
    )
}

#[test]
fn tv_matches_grid_quadrature() {
    let cfg = OpticsConfig::default();
    let (p, w) = densities(&cfg);
    let oracle = 0.5 * grid_integral(&cfg, 4_000_000, |x| (p(x) - w(x)).abs());
    let tv = tv_distance(&cfg).unwrap();
    assert!((tv - oracle).abs() < 1e-9, "{tv} vs {oracle}");
    assert!((tv - 1.0 / PI).abs() < 1e-12);
}

#[test]
fn tv_with_envelope_matches_grid_quadrature() {
    let cfg = OpticsConfig {
        envelope_enabled: true,
        ..OpticsConfig::default()
    };
    let p = PatternDistribution::particle(&cfg).unwrap();
    let w = PatternDistribution::wave(&cfg, 0.0).unwrap();
    let oracle = 0.5
        * grid_integral(&cfg, 2_000_000, |x| {
            (p.density(x).unwrap() - w.density(x).unwrap()).abs()
        });
    assert!((tv_distance(&cfg).unwrap() - oracle).abs() < 1e-7);
}

#[test]
fn optimal_set_and_degenerate_sets() {
    let cfg = OpticsConfig::default();
    let opt = optimal_interval_set(&cfg).unwrap();
    let d = delta_of_interval_set(&opt, &cfg).unwrap();
    assert!((d - (1.0 - 1.0 / PI)).abs() < 1e-9);
    assert!(d < 0.9 && tv_distance(&cfg).unwrap() > 0.1);
    assert_eq!(
        delta_of_interval_set(&IntervalSet::empty(), &cfg).unwrap(),
        1.0
    );
    assert_eq!(
        delta_of_interval_set(&IntervalSet::full(&cfg), &cfg).unwrap(),
        1.0
    );

    // The cores are the middle half of each bright fringe.
    let a = cfg.fringe_scale();
    let h = cfg.halfwidth();
    for (lo, hi) in opt.iter().filter(|&(lo, hi)| lo > -h && hi < h) {
        let centre = 0.5 * (lo + hi);
        assert!(((centre / a).round() * a - centre).abs() < 1e-15);
        assert!((hi - lo - a / 2.0).abs() < 1e-15);
    }
    // Edges of the window sit on bright fringes and carry half cores.
    assert!((opt.measure() - cfg.window_width() / 2.0).abs() < 1e-15);

    let report = contradiction_margin(&opt, &cfg).unwrap();
    assert!((report.margin - report.tv_value).abs() < 1e-9);
    assert!(!report.feasible_under_outcome_i);
}

#[test]
fn optimal_set_beats_random_sets() {
    let cfg = OpticsConfig::default();
    let best = delta_of_interval_set(&optimal_interval_set(&cfg).unwrap(), &cfg).unwrap();
    let mut rng = replicate_stream(3, 3);
    let h = cfg.halfwidth();
    for _ in 0..200 {
        let mut pts: Vec<f64> = (0..6).map(|_| rng.gen_range(-h..h)).collect();
        pts.sort_by(f64::total_cmp);
        let set = IntervalSet::new(pts.chunks(2).map(|c| (c[0], c[1])).collect()).unwrap();
        assert!(delta_of_interval_set(&set, &cfg).unwrap() >= best - 1e-12);
    }
}

fn interval_set_strategy() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec(-5e-3f64..5e-3, 0..12).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup();
        if v.len() % 2 == 1 {
            v.pop();
        }
        IntervalSet::new(v.chunks(2).map(|c| (c[0], c[1])).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn delta_plus_complement_is_two(set in interval_set_strategy()) {
        let cfg = OpticsConfig::default();
        let d = delta_of_interval_set(&set, &cfg).unwrap();
        let dc = delta_of_interval_set(&set.complement(&cfg), &cfg).unwrap();
        prop_assert!((d + dc - 2.0).abs() < 1e-9);
        prop_assert!((1.0 - 1.0 / PI - 1e-9..=1.0 + 1.0 / PI + 1e-9).contains(&d));
    }
}

#[test]
fn bhattacharyya_and_sample_sizes() {
    let cfg = OpticsConfig::default();
    let (p, w) = densities(&cfg);
    let oracle = grid_integral(&cfg, 2_000_000, |x| (p(x) * w(x)).sqrt());
    let rho = bhattacharyya_coefficient(&cfg).unwrap();
    assert!((rho - oracle).abs() < 1e-9);
    assert!((rho - 2.0 * 2f64.sqrt() / PI).abs() < 1e-15);
    assert_eq!(required_sample_size(1e-3, &cfg).unwrap().samples, 60);
    assert_eq!(required_sample_size(0.25, &cfg).unwrap().samples, 7);
    let n = required_sample_size(1e-3, &cfg).unwrap().samples as i32;
    assert!(0.5 * rho.powi(n) <= 1e-3 && 0.5 * rho.powi(n - 1) > 1e-3);
}

#[test]
fn ml_classifier_error_below_bound() {
    let cfg = OpticsConfig::default();
    let n = required_sample_size(1e-3, &cfg).unwrap().samples as usize;
    let clf = PatternClassifier::new(&cfg).unwrap().with_threshold(0.0);
    let p = PatternDistribution::particle(&cfg).unwrap();
    let w = PatternDistribution::wave(&cfg, 0.0).unwrap();
    let mut errors = 0;
    let reps = 2000;
    for k in 0..reps {
        let mut rng = replicate_stream(17, k);
        let xs: Vec<f64> = (0..n).map(|_| sample_impact(&w, &mut rng)).collect();
        errors += (clf.classify(&xs).unwrap().verdict != Verdict::Wave) as usize;
        let xs: Vec<f64> = (0..n).map(|_| sample_impact(&p, &mut rng)).collect();
        errors += (clf.classify(&xs).unwrap().verdict != Verdict::Particle) as usize;
    }
    assert!((errors as f64) / (2.0 * reps as f64) < 1e-3, "{errors}");
}

#[test]
fn region_conditioned_classification() {
    let cfg = OpticsConfig::default();
    let cores = optimal_interval_set(&cfg).unwrap();
    let p = PatternDistribution::particle(&cfg).unwrap();
    let mut rng = replicate_stream(8, 0);
    let inside: Vec<f64> = std::iter::repeat_with(|| sample_impact(&p, &mut rng))
        .filter(|&x| cores.contains(x))
        .take(5000)
        .collect();
    let clf = PatternClassifier::new(&cfg).unwrap();
    assert_eq!(clf.classify(&inside).unwrap().verdict, Verdict::Wave);
    assert_eq!(
        clf.classify_within(&inside, &cores).unwrap().verdict,
        Verdict::Particle
    );
    assert!(clf.classify_within(&inside, &IntervalSet::empty()).is_err());
}

#[test]
fn posterior_monte_carlo() {
    // X drawn from ½p + ½w; fraction of particle draws near x tracks p/(p+w).
    let cfg = OpticsConfig::default();
    let p = PatternDistribution::particle(&cfg).unwrap();
    let w = PatternDistribution::wave(&cfg, 0.0).unwrap();
    let a = cfg.fringe_scale();
    let mut rng = replicate_stream(1, 9);
    let centres = [0.0, a / 4.0, 0.4 * a, 0.48 * a];
    let half = a / 100.0;
    let mut hits = [[0u32; 2]; 4];
    for _ in 0..400_000 {
        let r1 = rng.gen_bool(0.5);
        let x = if r1 {
            sample_impact(&p, &mut rng)
        } else {
            sample_impact(&w, &mut rng)
        };
        let phase = x.rem_euclid(a);
        for (k, &c) in centres.iter().enumerate() {
            if (phase - c).abs() < half || (phase - a - c).abs() < half {
                hits[k][0] += 1;
                hits[k][1] += r1 as u32;
            }
        }
    }
    for (k, &c) in centres.iter().enumerate() {
        let emp = hits[k][1] as f64 / hits[k][0] as f64;
        let exact = exact_posterior(c, &cfg).unwrap();
        assert!((exact - approx_posterior(c, &cfg)).abs() < 1e-12);
        assert!((emp - exact).abs() < 0.03, "x={c}: {emp} vs {exact}");
    }
    assert!((exact_posterior(0.0, &cfg).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((exact_posterior(a / 2.0, &cfg).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn empirical_tv_approaches_closed_form() {
    let cfg = OpticsConfig::default();
    let p = PatternDistribution::particle(&cfg).unwrap();
    let w = PatternDistribution::wave(&cfg, 0.0).unwrap();
    let mut rng = replicate_stream(2, 2);
    let xs: Vec<f64> = (0..400_000).map(|_| sample_impact(&p, &mut rng)).collect();
    let ys: Vec<f64> = (0..400_000).map(|_| sample_impact(&w, &mut rng)).collect();
    let tv = tv_distance_empirical_aligned(&xs, &ys, &cfg).unwrap();
    assert!((tv - 1.0 / PI).abs() < 0.02, "{tv}");
}
