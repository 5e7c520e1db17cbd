//! Screen patterns checked against closed forms written out here.

use std::f64::consts::PI;

use eprsim::experiment::{
    coincidence_rate, field_alice_focal, field_alice_offfocal, field_bob, parse_config, path_lengths, sweep_pattern,
    sweep_pattern_on, AliceSetting, Geometry, OffFocalPoint, PathModel, SpdcState,
};

/// `r_1 − r_2` for slits at `±a/2`, rewritten as `−2az/(r_1 + r_2)` so the
/// difference is not a cancellation of two ~1 m lengths.
fn path_difference(g: &Geometry, z: f64) -> f64 {
    let l = g.slits_to_screen;
    let a = g.slit_separation;
    let r1 = l.hypot(z - a / 2.0);
    let r2 = l.hypot(z + a / 2.0);
    -2.0 * a * z / (r1 + r2)
}

/// Focal coincidence rate of the two-term field correlation:
/// `|ε(e^{ik r_2} − e^{ik r_1})|² = 2ε²(1 − cos kΔ)`.
fn focal_oracle(eps: f64, g: &Geometry, z: f64) -> f64 {
    let k = 2.0 * PI / g.wavelength;
    2.0 * eps * eps * (1.0 - (k * path_difference(g, z)).cos())
}

#[test]
fn focal_pattern_matches_closed_form() {
    let g = Geometry::default();
    let eps = 0.1;
    let p = sweep_pattern(&SpdcState::new(eps).unwrap(), &g, AliceSetting::Focal).unwrap();
    assert_eq!(p.len(), 201);
    let peak = 4.0 * eps * eps;
    for (&z, &v) in p.positions().iter().zip(p.values()) {
        let want = focal_oracle(eps, &g, z);
        // relative where the value is not near a null, absolute against the peak otherwise
        let err = (v - want).abs() / want.max(1e-6 * peak);
        assert!(err < 1e-10, "z={z}: {v} vs {want}");
    }
    // centre of the screen is an exact null, the peak is 4ε²
    assert_eq!(p.values()[100], 0.0);
    assert!((p.max() - peak).abs() < 1e-3 * peak);
}

#[test]
fn offfocal_outcomes_are_flat() {
    let g = Geometry::default();
    let s = SpdcState::new(0.1).unwrap();
    for (alice, level) in [
        (AliceSetting::OffFocalL, 0.01),
        (AliceSetting::OffFocalM, 0.01),
        (AliceSetting::OffFocalSum, 0.02),
    ] {
        let p = sweep_pattern(&s, &g, alice).unwrap();
        assert!(p.max() / p.min() - 1.0 < 1e-12, "{alice}");
        assert!((p.max() - level).abs() < 1e-15, "{alice}");
    }
}

#[test]
fn focal_flux_equals_offfocal_flux_over_whole_periods() {
    // fringe period λL/a; a screen spanning an integer number of periods
    let mut g = Geometry::default();
    g.path_model = PathModel::Paraxial;
    let period = g.wavelength * g.slits_to_screen / g.slit_separation;
    let n = 4000;
    let grid: Vec<f64> = (0..n).map(|i| -period + 2.0 * period * (i as f64 + 0.5) / n as f64).collect();
    g.screen_halfwidth = period;
    let s = SpdcState::new(0.1).unwrap();
    let mean = |a| {
        let p = sweep_pattern_on(&s, &g, a, &grid).unwrap();
        p.values().iter().sum::<f64>() / n as f64
    };
    assert!((mean(AliceSetting::Focal) - mean(AliceSetting::OffFocalSum)).abs() < 1e-12);
}

#[test]
fn paraxial_model_fringe_spacing() {
    let mut g = Geometry::default();
    g.path_model = PathModel::Paraxial;
    let s = SpdcState::new(0.1).unwrap();
    let period = g.wavelength * g.slits_to_screen / g.slit_separation;
    let bob = field_bob(&g, period).unwrap();
    // one full period away from the central null is another null
    let r = coincidence_rate(&s, &field_alice_focal(&g), &bob);
    assert!(r < 1e-20, "{r}");
    let half = field_bob(&g, period / 2.0).unwrap();
    let r = coincidence_rate(&s, &field_alice_focal(&g), &half);
    assert!((r - 0.04).abs() < 1e-15);
}

#[test]
fn path_constants_do_not_move_the_focal_fringes() {
    let text = "path_r_D = 0.37\npath_r_K = 1.25\npath_r_L = 0.8\npath_r_M = 0.8\n";
    let cfg = parse_config(text).unwrap();
    cfg.validate().unwrap();
    let s = SpdcState::new(0.1).unwrap();
    let a = sweep_pattern(&s, &cfg.geometry, AliceSetting::Focal).unwrap();
    let b = sweep_pattern(&s, &Geometry::default(), AliceSetting::Focal).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() <= 1e-12 * 0.04);
    }
}

#[test]
fn slit_paths_against_direct_lengths() {
    let g = Geometry::default();
    for z in [-5e-3, -1e-3, 0.0, 2.5e-4, 4e-3] {
        let p = path_lengths(&g, z).unwrap();
        let r1 = g.slits_to_screen.hypot(z - g.slit_separation / 2.0);
        let r2 = g.slits_to_screen.hypot(z + g.slit_separation / 2.0);
        assert!((p.r1() - r1).abs() < 1e-15);
        assert!((p.r2() - r2).abs() < 1e-15);
        assert!((p.difference() - path_difference(&g, z)).abs() < 1e-18);
    }
    assert!(path_lengths(&g, 6e-3).is_err());
}

#[test]
fn offfocal_point_fields() {
    let g = Geometry::default();
    let l = field_alice_offfocal(&g, OffFocalPoint::L);
    let m = field_alice_offfocal(&g, OffFocalPoint::M);
    let s = SpdcState::new(0.2).unwrap();
    let bob = field_bob(&g, 1.3e-3).unwrap();
    assert!((coincidence_rate(&s, &l, &bob) - 0.04).abs() < 1e-15);
    assert!((coincidence_rate(&s, &m, &bob) - 0.04).abs() < 1e-15);
}
