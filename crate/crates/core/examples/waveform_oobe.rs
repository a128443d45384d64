//! OFDM vs f-OFDM out-of-band emission, linear and through a TWTA.
//!
//! cargo run --release --example waveform_oobe -- [ibo_db] [seed]

use ntn_lab::waveform::{run_study, StudyConfig};

fn main() -> ntn_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let ibo: f64 = args
        .next()
        .map(|s| s.parse().expect("ibo_db"))
        .unwrap_or(20.0);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(1);

    let r = run_study(&StudyConfig::new(ibo, seed))?;
    println!(
        "{:<14} {:>12} {:>12} {:>12}",
        "", "in-band dB", "oob dB", "oobe dB"
    );
    for (name, s) in [
        ("ofdm", &r.ofdm),
        ("f-ofdm", &r.fofdm),
        ("ofdm+twta", &r.ofdm_twta),
        ("f-ofdm+twta", &r.fofdm_twta),
    ] {
        println!(
            "{:<14} {:>12.2} {:>12.2} {:>12.2}",
            name, s.in_band_db, s.out_of_band_db, s.oobe_suppression_db
        );
    }
    println!("linear gap      {:.2} dB", r.linear_gap_db());
    println!("twta gap        {:.2} dB (IBO {ibo} dB)", r.twta_gap_db());
    println!(
        "papr@1e-3       ofdm {:.3} dB, f-ofdm {:.3} dB",
        r.ofdm_papr_db, r.fofdm_papr_db
    );
    Ok(())
}
