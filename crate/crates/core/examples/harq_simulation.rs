//! Saturated stop-and-wait HARQ: utilization against the process count.
//!
//! cargo run --release --example harq_simulation -- [scenario] [loss] [seed]

use ntn_lab::mac_sim::{simulate_harq, DelayChannel, HarqConfig};
use ntn_lab::scenario::builtin_scenario;

fn main() -> ntn_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "embb_geo".into());
    let loss: f64 = args.next().map(|a| a.parse().expect("loss")).unwrap_or(0.0);
    let seed: u64 = args.next().map(|a| a.parse().expect("seed")).unwrap_or(1);
    let scenario = builtin_scenario(&name).expect("builtin scenario name");
    let channel = DelayChannel::from_scenario(&scenario)?.with_loss(loss)?;

    println!(
        "{:>6} {:>10} {:>10} {:>12}",
        "procs", "cycle ms", "util", "tb/s"
    );
    for n in [1, 8, 16, 64, 256, 555, 1024] {
        let cfg = HarqConfig::for_scenario(&scenario, n, 20_000.0).without_log();
        let s = simulate_harq(&channel, &cfg, seed)?.stats;
        println!(
            "{n:>6} {:>10.1} {:>10.4} {:>12.1}",
            s.cycle_ms, s.utilization, s.throughput_tb_per_s
        );
    }
    Ok(())
}
