use eprsim::experiment::{sweep_pattern, AliceSetting, Geometry, Normalization, Pattern, SpdcState};
use eprsim::mc::{
    decode_bit, histogram, moving_average, read_event_log, run_trials, simulate_run, summarize, visibility,
    write_event_log, LogHeader, RunConfig, Sampler, TrialOptions, DEFAULT_WINDOW,
};
use eprsim::measurement::MeasurementRule;

fn run(rule: MeasurementRule, n: u64, seed: u64) -> Vec<eprsim::mc::EventRecord> {
    simulate_run(&RunConfig::new(rule, Geometry::default(), n, seed)).unwrap()
}

/// Wilson–Hilferty approximation to the chi-square quantile.
fn chi2_quantile(df: f64, z: f64) -> f64 {
    let c = 2.0 / (9.0 * df);
    df * (1.0 - c + z * c.sqrt()).powi(3)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[test]
fn offfocal_counts_pass_chi_square() {
    let n_bins = 201;
    let ev = run(MeasurementRule::VonNeumannOffFocal, 10_000, 1);
    let counts = histogram(&ev, n_bins).unwrap().counts();
    let expect = 10_000.0 / n_bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    // 99th percentile, z = 2.3263
    let crit = chi2_quantile((n_bins - 1) as f64, 2.3263);
    assert!(chi2 < crit, "{chi2} >= {crit}");
}

#[test]
fn coherent_counts_follow_analytic_fringes() {
    let ev = run(MeasurementRule::CoherentFocal, 10_000, 2);
    let counts: Vec<f64> = histogram(&ev, 201).unwrap().counts().iter().map(|&c| c as f64).collect();
    let analytic = sweep_pattern(&SpdcState::new(0.1).unwrap(), &Geometry::default(), AliceSetting::Focal).unwrap();
    let r = pearson(&counts, analytic.values());
    assert!(r > 0.95, "{r}");
}

#[test]
fn sampling_converges_within_five_sigma() {
    let n = 1_000_000u64;
    let g = Geometry::default();
    let sampler = Sampler::new(MeasurementRule::CoherentFocal, &g).unwrap();
    let p = sampler.marginal();
    let ev = run(MeasurementRule::CoherentFocal, n, 3);
    let counts = histogram(&ev, 201).unwrap().counts();
    for (i, (&c, &pi)) in counts.iter().zip(&p).enumerate() {
        let sd = (n as f64 * pi * (1.0 - pi)).sqrt();
        let dev = (c as f64 - n as f64 * pi).abs();
        if sd == 0.0 {
            assert_eq!(c, 0, "bin {i}");
        } else {
            assert!(dev < 5.0 * sd, "bin {i}: {dev} vs {sd}");
        }
    }
}

#[test]
fn decoder_examples_at_ten_thousand_events() {
    let d = decode_bit(&run(MeasurementRule::CoherentFocal, 10_000, 4), 201, 0.5, DEFAULT_WINDOW).unwrap();
    assert_eq!(d.bit, 1);
    assert!(!d.low_confidence);
    let d = decode_bit(&run(MeasurementRule::VonNeumannOffFocal, 10_000, 4), 201, 0.5, DEFAULT_WINDOW).unwrap();
    assert_eq!(d.bit, 0);
    let d = decode_bit(&run(MeasurementRule::CoherentFocal, 5, 4), 201, 0.5, DEFAULT_WINDOW).unwrap();
    assert!(d.low_confidence);
}

#[test]
fn decoder_only_reads_bob_bins() {
    let mut ev = run(MeasurementRule::CoherentFocal, 2000, 8);
    let before = decode_bit(&ev, 201, 0.5, DEFAULT_WINDOW).unwrap();
    for e in &mut ev {
        e.alice_outcome = "scrambled".into();
        e.is_background = !e.is_background;
    }
    assert_eq!(decode_bit(&ev, 201, 0.5, DEFAULT_WINDOW).unwrap(), before);
}

#[test]
fn visibility_of_analytic_patterns() {
    let s = SpdcState::new(0.1).unwrap();
    let g = Geometry::default();
    let focal = sweep_pattern(&s, &g, AliceSetting::Focal).unwrap();
    let flat = sweep_pattern(&s, &g, AliceSetting::OffFocalSum).unwrap();
    assert!((visibility(&focal, 1).unwrap().v - 1.0).abs() < 1e-9);
    assert!(visibility(&flat, 1).unwrap().v < 1e-9);
    assert_eq!(visibility(&focal, 1).unwrap().std_error, 0.0);
}

#[test]
fn visibility_of_half_and_half_mixture_on_whole_periods() {
    // each component scaled to unit mean: fringes 1 − cos in [0, 2], flat 1.
    // the 50/50 mixture spans [0.5, 1.5], so V = 1/2
    let n = 400;
    let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let fringe: Vec<f64> = x.iter().map(|&t| 1.0 - (2.0 * std::f64::consts::PI * t / 100.0).cos()).collect();
    let mix: Vec<f64> = fringe.iter().map(|f| 0.5 * f + 0.5).collect();
    let p = Pattern::new(x, mix, Normalization::Raw).unwrap();
    assert!((visibility(&p, 1).unwrap().v - 0.5).abs() < 1e-12);
}

#[test]
fn smoothing_window_three() {
    let v = moving_average(&[0.0, 3.0, 0.0, 3.0, 0.0], 3).unwrap();
    assert_eq!(v, vec![1.0, 2.0, 1.0]);
}

#[test]
fn batch_error_rates() {
    let g = Geometry::default();
    let opts = TrialOptions {
        trials: 200,
        ..TrialOptions::default()
    };
    let rate = |rule| {
        let r = run_trials(&RunConfig::new(rule, g.clone(), 1000, 99), &opts).unwrap();
        summarize(rule, &r)
    };
    assert!(rate(MeasurementRule::CoherentFocal).bit_error_rate < 0.01);
    assert!(rate(MeasurementRule::VonNeumannOffFocal).bit_error_rate < 0.01);
    assert_eq!(rate(MeasurementRule::LuedersFocal).ones, 0);
}

#[test]
fn event_log_bytes_are_reproducible() {
    let mut cfg = RunConfig::new(MeasurementRule::CoherentFocal, Geometry::default(), 400, 12345);
    cfg.background_rate = 0.05;
    cfg.efficiency = 0.8;
    let bytes = || {
        let mut buf = Vec::new();
        write_event_log(&mut buf, &LogHeader::for_run(&cfg), &simulate_run(&cfg).unwrap()).unwrap();
        buf
    };
    let a = bytes();
    assert_eq!(a, bytes());
    let log = read_event_log(a.as_slice()).unwrap();
    assert_eq!(log.header.get("seed"), Some("12345"));
    assert_eq!(log.header.get("rule"), Some("CoherentFocal"));
    assert_eq!(log.header.get("geometry_hash"), Some(Geometry::default().hash().as_str()));
    assert_eq!(log.events.len(), 400);
}

#[test]
fn draw_order_reproduced_from_the_raw_generator() {
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // four deviates per pair: detection, background, outcome, bin
    let seed = 0xC0FFEE;
    let mut cfg = RunConfig::new(MeasurementRule::VonNeumannOffFocal, Geometry::default(), 50, seed);
    cfg.stream = 5;
    cfg.efficiency = 0.7;
    let ev = simulate_run(&cfg).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(5);
    let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut want = Vec::new();
    while want.len() < 50 {
        let (d, _b, o, z) = (u(), u(), u(), u());
        if d >= 0.7 {
            continue;
        }
        let outcome = if o < 0.5 { "l" } else { "m" };
        want.push((outcome, (z * 201.0) as usize));
    }
    let got: Vec<(&str, usize)> = ev.iter().map(|e| (e.alice_outcome.as_str(), e.bob_bin)).collect();
    assert_eq!(got, want);
}

#[test]
fn offfocal_outcomes_split_evenly() {
    let ev = run(MeasurementRule::VonNeumannOffFocal, 10_000, 6);
    let l = ev.iter().filter(|e| e.alice_outcome == "l").count() as f64;
    // binomial sd = 50
    assert!((l - 5000.0).abs() < 250.0, "{l}");
}
