//! Timing advance granularity and reach per numerology, and the best command
//! for each builtin scenario's round trip.
//!
//! cargo run --example timing_advance

use ntn_lab::geometry::round_trip_time;
use ntn_lab::mac_sim::{best_nbiot_command, best_nr_command, uplink_timing_residual};
use ntn_lab::numerology::{
    differential_delay_limit, max_compensable_distance, nbiot_max_ta_command, nbiot_ta_time,
    ta_distance_step, Numerology,
};
use ntn_lab::scenario::builtin_scenarios;
use ntn_lab::Service;

fn main() -> ntn_lab::Result<()> {
    println!(
        "{:>3} {:>9} {:>12} {:>14}",
        "mu", "scs kHz", "step m", "reach km"
    );
    for mu in 0..=5 {
        println!(
            "{mu:>3} {:>9} {:>12.2} {:>14.1}",
            Numerology::new(mu)?.scs_khz(),
            ta_distance_step(mu)? * 1e3,
            max_compensable_distance(mu)?
        );
    }
    let nb = nbiot_ta_time(nbiot_max_ta_command())?;
    println!(
        "nb-iot max TA {:.3} ms, differential range limit {:.1} km\n",
        nb * 1e3,
        differential_delay_limit(nb)
    );

    for s in builtin_scenarios() {
        let rtt = round_trip_time(&s)?.rtt_ms;
        let cmd = match s.service {
            Service::NbIot => best_nbiot_command(rtt),
            _ => best_nr_command(rtt, s.mu),
        };
        match cmd {
            Ok(cmd) => println!(
                "{}: rtt {rtt:.3} ms -> {cmd:?}, residual {:.3} us",
                s.name,
                uplink_timing_residual(rtt, cmd) * 1e6
            ),
            Err(e) => println!("{}: rtt {rtt:.3} ms -> {e}", s.name),
        }
    }
    Ok(())
}
