//! Doppler over one LEO pass for two UEs on the ground track, with the
//! common and differential parts.
//!
//! cargo run --example doppler_pass -- [altitude_km] [separation_km] [carrier_hz]

use ntn_lab::geometry::{differential_doppler, PassGeometry};
use ntn_lab::PhysicalConstants;

fn main() -> ntn_lab::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<f64>().expect("number"));
    let h = args.next().unwrap_or(600.0);
    let sep = args.next().unwrap_or(200.0);
    let fc = args.next().unwrap_or(2.0e9);

    let pass = PassGeometry::pair(h, sep, fc).with_time_step(1.0);
    let s = differential_doppler(&pass)?;
    println!(
        "visible for {:.1} s, {} samples",
        pass.visibility_duration_s(&PhysicalConstants::DEFAULT),
        s.len()
    );
    println!(
        "{:>8} {:>12} {:>12} {:>12}",
        "t s", "ue0 Hz", "ue1 Hz", "diff Hz"
    );
    let stride = (s.len() / 20).max(1);
    for i in (0..s.len()).step_by(stride) {
        println!(
            "{:>8.1} {:>12.1} {:>12.1} {:>12.1}",
            s.time_s[i],
            s.doppler_hz[0][i],
            s.doppler_hz[1][i],
            s.pairwise_hz(1, 0, i)
        );
    }
    println!("max |common|       {:.1} Hz", s.max_abs_common_hz());
    println!("max |differential| {:.1} Hz", s.max_abs_differential_hz());
    Ok(())
}
