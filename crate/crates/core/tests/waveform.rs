//! Waveform chain: OFDM generation, filtering, amplifier and measurement.

use ntn_lab::waveform::{
    apply_fofdm, apply_twta, compose_uplink, dirichlet_leakage, estimate_psd, generate_ofdm,
    interpolate, papr_ccdf, run_study, FilterSpec, IqBuffer, OfdmConfig, StudyConfig, TwtaModel,
    UeTransmission, UplinkConfig,
};
use ntn_lab::Error;

fn small_study(ibo: f64) -> StudyConfig {
    let mut cfg = StudyConfig::new(ibo, 3);
    cfg.ofdm = cfg.ofdm.with_symbols(120);
    cfg
}

#[test]
fn deeper_back_off_restores_filtering_gain() {
    let hot = run_study(&small_study(3.0)).unwrap();
    let cold = run_study(&small_study(30.0)).unwrap();
    assert!(cold.fofdm_twta.oobe_suppression_db > hot.fofdm_twta.oobe_suppression_db + 10.0);
    assert!(cold.twta_gap_db() > hot.twta_gap_db());
    // The linear branch does not see the amplifier.
    assert_eq!(
        cold.fofdm.oobe_suppression_db,
        run_study(&small_study(3.0))
            .unwrap()
            .fofdm
            .oobe_suppression_db
    );
}

#[test]
fn study_is_reproducible() {
    let a = run_study(&small_study(20.0)).unwrap();
    let b = run_study(&small_study(20.0)).unwrap();
    assert_eq!(a.ofdm.psd_db, b.ofdm.psd_db);
    assert_eq!(a.fofdm_twta.psd_db, b.fofdm_twta.psd_db);
    assert_eq!(a.fofdm_ccdf, b.fofdm_ccdf);
}

#[test]
fn filter_band_must_match_the_signal() {
    let x = generate_ofdm(&OfdmConfig::default().with_symbols(10), 1).unwrap();
    let wrong = FilterSpec::for_band(0.1);
    assert!(matches!(
        apply_fofdm(&x, &wrong),
        Err(Error::MismatchedBand { .. })
    ));
}

#[test]
fn psd_needs_enough_samples() {
    let x = generate_ofdm(&OfdmConfig::default().with_symbols(5), 1).unwrap();
    assert!(matches!(
        estimate_psd(&x),
        Err(Error::InsufficientSamples { .. })
    ));
}

#[test]
fn papr_tail_is_monotone() {
    let x = generate_ofdm(&OfdmConfig::default().with_symbols(1000), 8).unwrap();
    let deep = papr_ccdf(&x, 1e-4).unwrap();
    let shallow = papr_ccdf(&x, 1e-2).unwrap();
    assert!(deep >= shallow);
    assert!(shallow > 0.0);
}

#[test]
fn amplifier_is_linear_at_large_back_off() {
    let x = generate_ofdm(&OfdmConfig::default().with_symbols(20), 2).unwrap();
    let up = interpolate(&x, 4).unwrap();
    let m = TwtaModel::saleh(60.0);
    let y = apply_twta(&up, &m).unwrap();
    let g = m.small_signal_gain();
    let scale = (m.saturation_input().powi(2) / 1e6 / up.mean_power()).sqrt();
    for (a, b) in up.samples.iter().zip(&y.samples).step_by(97) {
        let linear = a * scale * g;
        assert!(
            (b - linear).norm() <= 1e-3 * linear.norm().max(1e-12),
            "{b} vs {linear}"
        );
    }
}

#[test]
fn iq_binary_round_trip() {
    let x = generate_ofdm(&OfdmConfig::default().with_symbols(3), 4).unwrap();
    let mut bytes = Vec::new();
    x.write_binary(&mut bytes).unwrap();
    let y = IqBuffer::read_binary(bytes.as_slice(), x.sample_rate).unwrap();
    assert_eq!(x.samples, y.samples);
    assert!(IqBuffer::read_binary(&b"garbage!"[..], 1.0).is_err());
}

#[test]
fn uplink_offset_leaks_into_neighbours() {
    let cfg = UplinkConfig::new(64, 15e3, 8, 1);
    let ues = |offset: f64| {
        vec![
            UeTransmission::new((4..8).collect()).with_offset(offset),
            UeTransmission::new((8..12).collect()),
        ]
    };
    let aligned = compose_uplink(&cfg, &ues(0.0)).unwrap();
    let shifted = compose_uplink(&cfg, &ues(7.5e3)).unwrap();
    assert!(shifted.leakage_db[0][1] > aligned.leakage_db[0][1] + 30.0);
    // A positive offset moves the tone down: half a bin leaves it equidistant
    // from its own bin and the one below, and 1.5 bins from the one above.
    let below = dirichlet_leakage(0.5, -1, 64);
    let above = dirichlet_leakage(0.5, 1, 64);
    assert!((below - 1.0).abs() < 1e-12, "{below}");
    assert!((above - 1.0 / 9.0).abs() < 1e-3, "{above}");
    assert!(matches!(
        compose_uplink(
            &cfg,
            &[UeTransmission::new(vec![3]), UeTransmission::new(vec![3])]
        ),
        Err(Error::OverlappingAssignments { subcarrier: 3 })
    ));
}
