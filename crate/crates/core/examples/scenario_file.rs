//! Round-trips a scenario through JSON, then loads it back and prints the
//! delay budget. Edit the written file to try other geometries.
//!
//! cargo run --example scenario_file -- [path]

use ntn_lab::geometry::round_trip_time;
use ntn_lab::scenario::{builtin_scenario, load_scenario};

fn main() -> ntn_lab::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("ntn_scenario.json")
            .display()
            .to_string()
    });
    if !std::path::Path::new(&path).exists() {
        let mut s = builtin_scenario("nbiot_leo600").expect("builtin");
        s.name = "custom_leo900".into();
        s.h_sat_km = 900.0;
        std::fs::write(&path, s.to_json()).map_err(|source| ntn_lab::Error::Io {
            path: path.clone().into(),
            source,
        })?;
        println!("wrote {path}");
    }
    let s = load_scenario(&path)?;
    let rt = round_trip_time(&s)?;
    println!("{}: {:?} at {} km", s.name, s.architecture, s.h_sat_km);
    println!("one way {:.3} ms, rtt {:.3} ms", rt.one_way_ms, rt.rtt_ms);
    Ok(())
}
