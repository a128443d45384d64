//! Minimum HARQ process count for a one-way delay and processing time.
//!
//! cargo run --example harq_dimensioning -- [processing_ms]

use ntn_lab::geometry::round_trip_time;
use ntn_lab::numerology::{harq_dimension, Numerology};
use ntn_lab::scenario::builtin_scenarios;

fn main() -> ntn_lab::Result<()> {
    let t_proc: f64 = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("processing_ms"))
        .unwrap_or(3.0);
    println!(
        "{:<16} {:>10} {:>6} {:>10} {:>6} {:>5}",
        "scenario", "owp ms", "tti", "t_harq ms", "n_min", "bits"
    );
    for s in builtin_scenarios() {
        let owp = round_trip_time(&s)?.one_way_ms;
        let tti = Numerology::new(s.mu)?.tti_ms();
        let d = harq_dimension(owp, t_proc, tti)?;
        println!(
            "{:<16} {:>10.3} {:>6} {:>10.3} {:>6} {:>5}",
            s.name, owp, tti, d.t_harq_ms, d.n_min, d.dci_bits
        );
    }
    Ok(())
}
