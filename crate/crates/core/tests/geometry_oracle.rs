//! Geometry against frozen oracle values and an independent planar-orbit model.

mod common;

use ntn_lab::geometry::{
    differential_doppler, doppler_shift, max_differential_doppler, slant_range,
    visibility_half_angle, PassGeometry,
};
use ntn_lab::numerology::{differential_delay_limit, NBIOT_MAX_TA_S};
use ntn_lab::PhysicalConstants;

// Frozen from a brute-force 1 ms scan of an Earth-centred position model.
const VISIBILITY_S: [(f64, f64); 2] = [(600.0, 509.837), (1500.0, 1048.392)];
const MAX_DIFF_DOPPLER_HZ: [(f64, f64, f64); 4] = [
    (600.0, 200.0, 18_205.8),
    (1500.0, 200.0, 6_938.1),
    (600.0, 40.0, 3_694.0),
    (1500.0, 40.0, 1_391.3),
];
const TA_WINDOW_FRACTION: [(f64, f64); 2] = [(600.0, 0.1805), (1500.0, 0.2276)];

#[test]
fn visibility_matches_frozen_values() {
    let c = PhysicalConstants::DEFAULT;
    for (h, want) in VISIBILITY_S {
        let got = PassGeometry::pair(h, 200.0, 2.2e9).visibility_duration_s(&c);
        assert!((got - want).abs() < 1e-3, "h={h}: {got}");
        let bisected = common::visibility_window_s(h, 10.0);
        assert!((got - bisected).abs() < 1e-6, "h={h}: {got} vs {bisected}");
    }
}

#[test]
fn max_differential_doppler_matches_frozen_values() {
    for (h, sep, want) in MAX_DIFF_DOPPLER_HZ {
        let got = max_differential_doppler(sep, h, 2.2e9).unwrap();
        assert!(common::rel_err(got, want) < 1e-4, "h={h} sep={sep}: {got}");
    }
}

#[test]
fn ta_window_fraction_matches_frozen_values() {
    let limit = differential_delay_limit(NBIOT_MAX_TA_S);
    for (h, want) in TA_WINDOW_FRACTION {
        let pass = PassGeometry::pair(h, 200.0, 2.2e9).with_time_step(0.01);
        let got = differential_doppler(&pass)
            .unwrap()
            .fraction_within_range_difference(limit);
        assert!((got - want).abs() < 5e-4, "h={h}: {got}");
    }
}

#[test]
fn slant_range_matches_position_model() {
    for h in [600.0, 1500.0, 35_786.0] {
        for el in [5.0, 10.0, 30.0, 60.0, 89.0] {
            // Find the pass time at which the oracle sees this elevation.
            let (mut lo, mut hi) = (0.0, 1.0);
            while common::elevation_deg(h, 0.0, hi) > el {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if common::elevation_deg(h, 0.0, mid) > el {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = common::range_m(h, 0.0, lo) / 1e3;
            let got = slant_range(h, el).unwrap();
            assert!(
                common::rel_err(got, oracle) < 1e-9,
                "h={h} el={el}: {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn doppler_sign_follows_approach() {
    let pass = PassGeometry::pair(600.0, 100.0, 2.2e9).with_time_step(1.0);
    let s = differential_doppler(&pass).unwrap();
    let mid = s.len() / 2;
    assert_eq!(s.time_s[mid], 0.0);
    assert!(s.doppler_hz[0][0] > 0.0);
    assert!(s.doppler_hz[0][s.len() - 1] < 0.0);
    assert_eq!(s.doppler_hz[0][mid], 0.0);
    assert!(common::doppler_fd(600.0, 0.0, -100.0, 2.2e9) > 0.0);
    assert!(doppler_shift(2.2e9, 600.0, 10.0, true) > doppler_shift(2.2e9, 600.0, 45.0, true));
}

#[test]
fn brute_force_scan_agrees_with_pass_series() {
    let closed = max_differential_doppler(200.0, 600.0, 2.2e9).unwrap();
    let brute = common::brute_max_differential(600.0, 200.0, 2.2e9, 10.0, 1e-3);
    assert!(common::rel_err(closed, brute) < 1e-3, "{closed} vs {brute}");
}

#[test]
fn no_visibility_above_zenith() {
    let c = PhysicalConstants::DEFAULT;
    assert!(visibility_half_angle(&c, 600.0, 91.0).is_none());
    assert!(visibility_half_angle(&c, 600.0, 90.0).unwrap().abs() < 1e-12);
}
