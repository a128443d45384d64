//! Four-step random access over a delayed channel, first with the default
//! timers and then with timers stretched past the round trip.
//!
//! cargo run --example random_access -- [scenario] [ues] [seed]

use ntn_lab::mac_sim::{simulate_ra, DelayChannel, RaConfig};
use ntn_lab::scenario::builtin_scenario;

fn main() -> ntn_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "embb_geo".into());
    let ues: usize = args.next().map(|a| a.parse().expect("ues")).unwrap_or(4);
    let seed: u64 = args.next().map(|a| a.parse().expect("seed")).unwrap_or(1);
    let mut scenario = builtin_scenario(&name).expect("builtin scenario name");
    let channel = DelayChannel::from_scenario(&scenario)?;
    println!("{}: rtt {:.3} ms", scenario.name, channel.rtt_ms());

    let run = |label: &str, s: &ntn_lab::ScenarioConfig| -> ntn_lab::Result<()> {
        let r = simulate_ra(s, &channel, &RaConfig::new(ues), seed)?;
        println!("{label}: success {:.2}", r.success_rate());
        for o in &r.outcomes {
            println!(
                "  ue {} {:?} attempts {} delay {:?} cause {:?}",
                o.ue, o.state, o.attempts, o.access_delay_ms, o.failure_cause
            );
        }
        Ok(())
    };
    run("default timers", &scenario)?;

    let t = &mut scenario.timers;
    let rtt = channel.rtt_ms();
    t.rar_window_ms = t.rar_window_ms.max(rtt + 10.0);
    t.contention_resolution_ms = t.contention_resolution_ms.max(rtt + 10.0);
    run("stretched timers", &scenario)
}
