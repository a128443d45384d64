//! Inter-UE leakage in an uplink OFDMA symbol when each UE carries its own
//! residual frequency error.
//!
//! cargo run --example uplink_leakage -- [offset_fraction_of_scs]

use ntn_lab::waveform::{compose_uplink, dirichlet_leakage, UeTransmission, UplinkConfig};

fn main() -> ntn_lab::Result<()> {
    let frac: f64 = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("fraction"))
        .unwrap_or(0.25);
    let cfg = UplinkConfig::new(48, 3_750.0, 8, 1);
    let ues: Vec<_> = (0..4)
        .map(|k| {
            let offset = if k == 1 {
                frac * cfg.subcarrier_spacing_hz
            } else {
                0.0
            };
            UeTransmission::new(vec![8 + 4 * k]).with_offset(offset)
        })
        .collect();
    let out = compose_uplink(&cfg, &ues)?;
    println!("leakage dB, row = source UE (UE 1 offset by {frac} subcarrier)");
    for row in &out.leakage_db {
        let cells: Vec<_> = row.iter().map(|v| format!("{v:>9.2}")).collect();
        println!("{}", cells.join(" "));
    }
    for d in [-4i64, 4, 8] {
        println!(
            "closed form, {d:+} bins: {:.2} dB",
            10.0 * dirichlet_leakage(frac, d, cfg.fft_size).log10()
        );
    }
    Ok(())
}
