use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use super::iq::IqBuffer;
use super::ofdm::qam64;
use crate::error::{Error, Result};

/// Leakage below this level is reported as the floor.
pub const LEAKAGE_FLOOR_DB: f64 = -400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct UplinkConfig {
    pub fft_size: usize,
    pub subcarrier_spacing_hz: f64,
    pub n_symbols: usize,
    /// Offset removed from the composite at the receiver before the transform.
    pub common_correction_hz: f64,
    pub seed: u64,
}

impl UplinkConfig {
    pub fn new(fft_size: usize, subcarrier_spacing_hz: f64, n_symbols: usize, seed: u64) -> Self {
        UplinkConfig {
            fft_size,
            subcarrier_spacing_hz,
            n_symbols,
            common_correction_hz: 0.0,
            seed,
        }
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.fft_size as f64 * self.subcarrier_spacing_hz
    }

    pub fn n_samples(&self) -> usize {
        self.fft_size * self.n_symbols
    }
}

/// One UE's tones and frequency error `f_k = f_ko + f_Δk`, plus optional
/// per-sample Doppler `f_dk(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UeTransmission {
    pub subcarriers: Vec<usize>,
    pub frequency_offset_hz: f64,
    pub doppler_hz: Vec<f64>,
}

impl UeTransmission {
    pub fn new(subcarriers: Vec<usize>) -> Self {
        UeTransmission {
            subcarriers,
            frequency_offset_hz: 0.0,
            doppler_hz: Vec::new(),
        }
    }

    pub fn with_offset(mut self, hz: f64) -> Self {
        self.frequency_offset_hz = hz;
        self
    }

    pub fn with_doppler(mut self, per_sample_hz: Vec<f64>) -> Self {
        self.doppler_hz = per_sample_hz;
        self
    }
}

#[derive(Debug, Clone)]
pub struct UplinkComposite {
    pub buffer: IqBuffer,
    /// `leakage_db[i][j]`: power of UE `i` in UE `j`'s subcarriers relative
    /// to UE `i`'s own, after the receive transform.
    pub leakage_db: Vec<Vec<f64>>,
}

/// Closed-form leakage (power ratio) of a tone offset by `delta` bins into a
/// bin `distance` away, relative to its own bin, for an `n`-point transform.
pub fn dirichlet_leakage(delta: f64, distance: i64, n: usize) -> f64 {
    let d = |x: f64| {
        if x.abs() < 1e-15 {
            1.0
        } else {
            (PI * x).sin() / (n as f64 * (PI * x / n as f64).sin())
        }
    };
    let own = d(delta);
    let other = d(delta + distance as f64);
    (other * other) / (own * own)
}

fn validate(cfg: &UplinkConfig, ues: &[UeTransmission]) -> Result<()> {
    if cfg.fft_size < 2 || cfg.n_symbols == 0 {
        return Err(Error::validation(
            "uplink",
            "fft_size >= 2 and n_symbols >= 1 required",
        ));
    }
    if !(cfg.subcarrier_spacing_hz.is_finite() && cfg.subcarrier_spacing_hz > 0.0) {
        return Err(Error::validation("subcarrier_spacing_hz", "must be > 0"));
    }
    let mut owner = vec![false; cfg.fft_size];
    for ue in ues {
        if ue.subcarriers.is_empty() {
            return Err(Error::validation(
                "subcarriers",
                "every UE needs at least one tone",
            ));
        }
        if !ue.doppler_hz.is_empty() && ue.doppler_hz.len() != cfg.n_samples() {
            return Err(Error::validation(
                "doppler_hz",
                format!("expected {} samples", cfg.n_samples()),
            ));
        }
        for &k in &ue.subcarriers {
            if k >= cfg.fft_size {
                return Err(Error::validation("subcarriers", format!("{k} >= fft_size")));
            }
            if owner[k] {
                return Err(Error::OverlappingAssignments { subcarrier: k });
            }
            owner[k] = true;
        }
    }
    Ok(())
}

/// Superposition `y_R = Σ x_UE_k e^{-j2π f_k t}` of per-UE OFDM signals,
/// with the Doppler phase integrated over time.
pub fn compose_uplink(cfg: &UplinkConfig, ues: &[UeTransmission]) -> Result<UplinkComposite> {
    validate(cfg, ues)?;
    let n = cfg.fft_size;
    let total = cfg.n_samples();
    let fs = cfg.sample_rate_hz();
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    let fft = planner.plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut received = Vec::with_capacity(ues.len());
    for ue in ues {
        let mut x = Vec::with_capacity(total);
        for _ in 0..cfg.n_symbols {
            let mut sym = vec![Complex64::default(); n];
            for &k in &ue.subcarriers {
                sym[k] = qam64(rng.gen_range(0..64));
            }
            ifft.process(&mut sym);
            x.extend(sym.into_iter().map(|v| v * scale));
        }
        let mut phase = 0.0;
        for (i, v) in x.iter_mut().enumerate() {
            let t = i as f64 / fs;
            let correction = 2.0 * PI * cfg.common_correction_hz * t;
            *v *= Complex64::from_polar(1.0, -phase + correction);
            let f = ue.frequency_offset_hz + ue.doppler_hz.get(i).copied().unwrap_or(0.0);
            phase += 2.0 * PI * f / fs;
        }
        received.push(x);
    }

    let mut composite = vec![Complex64::default(); total];
    for x in &received {
        composite.iter_mut().zip(x).for_each(|(c, v)| *c += v);
    }

    let mut leakage_db = Vec::with_capacity(ues.len());
    for x in &received {
        let mut bins = vec![0.0; n];
        for chunk in x.chunks_exact(n) {
            let mut sym: Vec<Complex64> = chunk.iter().map(|v| v * scale).collect();
            fft.process(&mut sym);
            bins.iter_mut()
                .zip(&sym)
                .for_each(|(b, v)| *b += v.norm_sqr());
        }
        let energy = |ue: &UeTransmission| ue.subcarriers.iter().map(|&k| bins[k]).sum::<f64>();
        let own = energy(&ues[leakage_db.len()]);
        let row = ues
            .iter()
            .map(|other| {
                let r = energy(other) / own;
                if r > 0.0 {
                    (10.0 * r.log10()).max(LEAKAGE_FLOOR_DB)
                } else {
                    LEAKAGE_FLOOR_DB
                }
            })
            .collect();
        leakage_db.push(row);
    }

    let buffer =
        IqBuffer::new(composite, 1.0).with_stage(format!("uplink(ues={},n={n})", ues.len()));
    Ok(UplinkComposite { buffer, leakage_db })
}
