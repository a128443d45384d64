//! Slant range and propagation delay per path, then the round trip, for
//! every builtin scenario.
//!
//! cargo run --example delay_tables

use ntn_lab::geometry::{path_table, round_trip_time};
use ntn_lab::scenario::builtin_scenarios;
use ntn_lab::PhysicalConstants;

fn main() -> ntn_lab::Result<()> {
    let c = PhysicalConstants::DEFAULT;
    for s in builtin_scenarios() {
        println!("{} ({:?}, h = {} km)", s.name, s.architecture, s.h_sat_km);
        for (path, g) in ["service", "feeder"].iter().zip(path_table(&c, &s)?) {
            println!(
                "  {path:<8} el {:>5.1} deg  d {:>10.3} km  {:>8.4} ms",
                g.elevation_deg, g.slant_range_km, g.one_way_delay_ms
            );
        }
        let rt = round_trip_time(&s)?;
        println!("  one way {:.3} ms, rtt {:.3} ms", rt.one_way_ms, rt.rtt_ms);
        let regen = round_trip_time(&s.with_regenerative_payload())?;
        println!("  regenerative rtt {:.3} ms\n", regen.rtt_ms);
    }
    Ok(())
}
