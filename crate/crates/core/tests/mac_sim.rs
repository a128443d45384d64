//! Discrete-event simulator behaviour across modules.

use ntn_lab::mac_sim::{
    apply_timing_advance, best_nbiot_command, best_nr_command, ms_to_ns, nprach_schedule,
    simulate_harq, simulate_ra, uplink_timing_residual, DelayChannel, EventQueue, FailureCause,
    HarqConfig, NprachFormat, NprachPreamble, RaConfig, TaSession,
};
use ntn_lab::numerology::TaCommand;
use ntn_lab::scenario::{embb_geo, nbiot_leo1500, nbiot_leo600};
use ntn_lab::Error;

#[test]
fn geo_random_access_expires_the_rar_window() {
    let s = embb_geo();
    let ch = DelayChannel::from_scenario(&s).unwrap();
    let r = simulate_ra(&s, &ch, &RaConfig::new(3), 1).unwrap();
    assert_eq!(r.success_rate(), 0.0);
    for o in &r.outcomes {
        assert_eq!(o.failure_cause, Some(FailureCause::RarWindowExpired));
        assert!(o.attempts >= 1);
    }
}

#[test]
fn geo_random_access_succeeds_with_extended_timers() {
    let mut s = embb_geo();
    s.timers.rar_window_ms = 600.0;
    s.timers.contention_resolution_ms = 600.0;
    let ch = DelayChannel::from_scenario(&s).unwrap();
    let r = simulate_ra(&s, &ch, &RaConfig::new(1), 1).unwrap();
    assert_eq!(r.success_rate(), 1.0);
    // Preamble, RAR, msg3 and msg4 each cross the channel once.
    let delay = r.outcomes[0].access_delay_ms.unwrap();
    assert!(delay >= 2.0 * ch.rtt_ms() - 1e-5, "{delay}");
}

#[test]
fn colliding_preambles_are_resolved_one_at_a_time() {
    let s = nbiot_leo600();
    let ch = DelayChannel::from_scenario(&s).unwrap();
    let cfg = RaConfig::new(4).with_forced_preamble(7);
    let r = simulate_ra(&s, &ch, &cfg, 5).unwrap();
    let first = &r.outcomes[0];
    assert!(first.success);
    assert_eq!(first.contention_failures, 0);
    assert!(r.outcomes[1..].iter().all(|o| o.contention_failures >= 1));
}

#[test]
fn lossy_channel_forces_retries() {
    let s = nbiot_leo1500();
    let ch = DelayChannel::from_scenario(&s)
        .unwrap()
        .with_loss(0.3)
        .unwrap();
    let r = simulate_ra(&s, &ch, &RaConfig::new(20), 11).unwrap();
    assert!(r.outcomes.iter().any(|o| o.attempts > 1));
}

#[test]
fn ra_is_deterministic_per_seed() {
    let s = nbiot_leo600();
    let ch = DelayChannel::from_scenario(&s)
        .unwrap()
        .with_loss(0.1)
        .unwrap();
    let cfg = RaConfig::new(10);
    let a = simulate_ra(&s, &ch, &cfg, 42).unwrap().log.to_text();
    let b = simulate_ra(&s, &ch, &cfg, 42).unwrap().log.to_text();
    let c = simulate_ra(&s, &ch, &cfg, 43).unwrap().log.to_text();
    assert_eq!(a, b);
    assert_ne!(a, c);
    for line in a.lines() {
        assert!(line.starts_with("t="), "{line}");
        assert!(line.contains(" node=") && line.contains(" ev="), "{line}");
    }
}

#[test]
fn nbiot_harq_matches_cycle_oracle() {
    let s = nbiot_leo600();
    let ch = DelayChannel::from_scenario(&s).unwrap();
    let cfg = HarqConfig::nbiot(1, 8, false, 100_000.0).without_log();
    let st = simulate_harq(&ch, &cfg, 1).unwrap().stats;
    let want = cfg.expected_utilization(&ch);
    assert!(
        (st.utilization - want).abs() / want < 1e-2,
        "{} vs {want}",
        st.utilization
    );
}

#[test]
fn harq_accounting_balances_under_loss() {
    let s = nbiot_leo600();
    let ch = DelayChannel::from_scenario(&s)
        .unwrap()
        .with_loss(0.25)
        .unwrap();
    let cfg = HarqConfig::nr(8, 1.0, 20_000.0).without_log();
    let st = simulate_harq(&ch, &cfg, 9).unwrap().stats;
    assert!(st.retransmissions > 0);
    assert_eq!(
        st.tbs_acked + st.tbs_dropped + st.tbs_in_flight,
        st.tbs_sent
    );
    assert_eq!(st.transmissions, st.tbs_sent + st.retransmissions);
    assert!(st.max_in_flight <= 8);
}

#[test]
fn harq_saturates_with_enough_processes() {
    let s = nbiot_leo600();
    let ch = DelayChannel::from_scenario(&s).unwrap();
    let cfg = HarqConfig::for_scenario(&s, 64, 10_000.0).without_log();
    let st = simulate_harq(&ch, &cfg, 1).unwrap().stats;
    assert!((st.utilization - 1.0).abs() < 1e-2, "{}", st.utilization);
}

#[test]
fn ta_commands_apply_after_their_offsets() {
    let mut nr = TaSession::connected(10.24, 0).unwrap();
    let at = apply_timing_advance(&mut nr, TaCommand::nr(100, 0).unwrap(), 4).unwrap();
    assert_eq!(at, 10);
    nr.advance_to(9);
    assert!(nr.applied_command().is_none());
    nr.advance_to(10);
    assert_eq!(nr.applied_command(), Some(TaCommand::nr(100, 0).unwrap()));

    let mut nb = TaSession::connected(10.24, 0).unwrap();
    assert_eq!(
        apply_timing_advance(&mut nb, TaCommand::nbiot(5).unwrap(), 10).unwrap(),
        23
    );
}

#[test]
fn ta_timer_expiry_needs_new_access() {
    let mut s = TaSession::connected(0.5, 0).unwrap();
    s.advance_to(501);
    assert!(!s.is_aligned());
    assert!(apply_timing_advance(&mut s, TaCommand::nr(1, 0).unwrap(), 501).is_err());
    s.realign(501);
    assert!(apply_timing_advance(&mut s, TaCommand::nr(1, 0).unwrap(), 502).is_ok());
}

#[test]
fn best_commands_round_to_the_grid() {
    let cmd = best_nr_command(0.4, 0).unwrap();
    let step = TaCommand::nr(1, 0).unwrap().time_s();
    assert!(uplink_timing_residual(0.4, cmd) <= step / 2.0 + 1e-15);
    assert!(matches!(
        best_nr_command(544.75, 0),
        Err(Error::TaUnreachable { .. })
    ));
    let nb = best_nbiot_command(0.5).unwrap();
    assert!(uplink_timing_residual(0.5, nb) <= step / 2.0 + 1e-15);
}

#[test]
fn event_queue_orders_by_time_then_insertion() {
    let mut q = EventQueue::new();
    q.schedule(ms_to_ns(2.0), "c");
    q.schedule(ms_to_ns(1.0), "a");
    q.schedule(ms_to_ns(1.0), "b");
    let order: Vec<_> = std::iter::from_fn(|| q.pop().map(|(_, e)| e)).collect();
    assert_eq!(order, ["a", "b", "c"]);
}

#[test]
fn nprach_hops_within_twelve_tones() {
    let p = NprachPreamble::new(NprachFormat::F1, 16).unwrap();
    let groups = nprach_schedule(&p, 3);
    assert_eq!(groups.len(), 64);
    assert!(groups.iter().all(|g| g.subcarrier < 12));
    assert!(groups.windows(2).all(|w| w[1].start_s > w[0].start_s));
}
