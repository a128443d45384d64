use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::iq::IqBuffer;
use super::window::kaiser;
use crate::error::{Error, Result};

/// Averaged modified periodogram settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdConfig {
    pub segment: usize,
    /// Fraction of each segment shared with the next.
    pub overlap: f64,
    pub kaiser_beta: f64,
    /// In-band region, as a fraction of the occupied half band.
    pub in_band: f64,
    /// Out-of-band region `[lo, hi]` in multiples of the occupied half band.
    pub out_of_band: (f64, f64),
}

impl Default for PsdConfig {
    fn default() -> Self {
        PsdConfig {
            segment: 4096,
            overlap: 0.5,
            kaiser_beta: 30.0,
            in_band: 0.8,
            out_of_band: (1.2, 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// Cycles per sample, ascending from -0.5.
    pub freq: Vec<f64>,
    pub psd_db: Vec<f64>,
    pub in_band_db: f64,
    pub out_of_band_db: f64,
    pub oobe_suppression_db: f64,
}

impl SpectrumEstimate {
    /// CSV with columns `freq_norm,psd_db`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "freq_norm,psd_db")?;
        for (f, p) in self.freq.iter().zip(&self.psd_db) {
            writeln!(w, "{f:.8},{p:.6}")?;
        }
        Ok(())
    }
}

/// PSD of `buffer` with OOBE measured around its declared occupied band.
pub fn estimate_psd(buffer: &IqBuffer) -> Result<SpectrumEstimate> {
    let half_band = buffer.occupied_half_band.ok_or_else(|| {
        Error::validation("occupied_half_band", "buffer has no declared occupied band")
    })?;
    estimate_psd_with(buffer, half_band, &PsdConfig::default())
}

pub fn estimate_psd_with(
    buffer: &IqBuffer,
    half_band: f64,
    cfg: &PsdConfig,
) -> Result<SpectrumEstimate> {
    let seg = cfg.segment;
    if seg < 8 {
        return Err(Error::validation("segment", "must be >= 8"));
    }
    if !(0.0..1.0).contains(&cfg.overlap) {
        return Err(Error::validation("overlap", "must lie in [0, 1)"));
    }
    if buffer.len() < 8 * seg {
        return Err(Error::InsufficientSamples {
            required: 8 * seg,
            actual: buffer.len(),
        });
    }
    let step = ((seg as f64 * (1.0 - cfg.overlap)).round() as usize).max(1);
    let w = kaiser(seg, cfg.kaiser_beta);
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let mut acc = vec![0.0; seg];
    let mut buf = vec![Complex64::default(); seg];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut count = 0usize;
    let mut start = 0;
    while start + seg <= buffer.len() {
        for ((b, x), wi) in buf
            .iter_mut()
            .zip(&buffer.samples[start..start + seg])
            .zip(&w)
        {
            *b = x * wi;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        acc.iter_mut()
            .zip(&buf)
            .for_each(|(a, v)| *a += v.norm_sqr());
        count += 1;
        start += step;
    }
    let norm = 1.0 / (count as f64 * w.iter().map(|v| v * v).sum::<f64>());
    let mut freq = Vec::with_capacity(seg);
    let mut lin = Vec::with_capacity(seg);
    for k in 0..seg {
        let bin = (k + seg / 2) % seg;
        let f = if bin < seg / 2 {
            bin as f64
        } else {
            bin as f64 - seg as f64
        } / seg as f64;
        freq.push(f);
        lin.push(acc[bin] * norm);
    }
    let mean_where = |pred: &dyn Fn(f64) -> bool| {
        let (s, n) = freq
            .iter()
            .zip(&lin)
            .filter(|(f, _)| pred(f.abs()))
            .fold((0.0, 0usize), |(s, n), (_, p)| (s + p, n + 1));
        if n == 0 {
            None
        } else {
            Some(s / n as f64)
        }
    };
    let (lo, hi) = cfg.out_of_band;
    let hi = (hi * half_band).min(0.5);
    let inb = mean_where(&|a| a <= cfg.in_band * half_band)
        .ok_or_else(|| Error::validation("half_band", "in-band region holds no bins"))?;
    let oob = mean_where(&|a| a >= lo * half_band && a <= hi)
        .ok_or_else(|| Error::validation("half_band", "out-of-band region holds no bins"))?;
    let db = |p: f64| 10.0 * p.max(1e-300).log10();
    Ok(SpectrumEstimate {
        freq,
        psd_db: lin.iter().map(|&p| db(p)).collect(),
        in_band_db: db(inb),
        out_of_band_db: db(oob),
        oobe_suppression_db: db(inb) - db(oob),
    })
}

fn normalized_powers(buffer: &IqBuffer) -> Result<Vec<f64>> {
    let mean = buffer.mean_power();
    if mean <= 0.0 {
        return Err(Error::Domain("PAPR of an all-zero buffer".into()));
    }
    Ok(buffer.samples.iter().map(|s| s.norm_sqr() / mean).collect())
}

/// PAPR (dB) exceeded with probability `probability`, per sample.
pub fn papr_ccdf(buffer: &IqBuffer, probability: f64) -> Result<f64> {
    if !(probability > 0.0 && probability < 1.0) {
        return Err(Error::validation("probability", "must lie in (0, 1)"));
    }
    let required = (100.0 / probability).ceil() as usize;
    if buffer.len() < required {
        return Err(Error::InsufficientSamples {
            required,
            actual: buffer.len(),
        });
    }
    let mut p = normalized_powers(buffer)?;
    let pos = (1.0 - probability) * (p.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    let (_, a, rest) = p.select_nth_unstable_by(lo, f64::total_cmp);
    let a = *a;
    let b = if frac > 0.0 {
        rest.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        a
    };
    Ok(10.0 * (a + frac * (b - a)).log10())
}

/// Empirical CCDF `P(PAPR > x)` at each threshold in dB.
pub fn papr_ccdf_curve(buffer: &IqBuffer, thresholds_db: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut p = normalized_powers(buffer)?;
    p.sort_unstable_by(f64::total_cmp);
    let n = p.len() as f64;
    Ok(thresholds_db
        .iter()
        .map(|&x| {
            let lin = 10f64.powf(x / 10.0);
            let above = p.len() - p.partition_point(|&v| v <= lin);
            (x, above as f64 / n)
        })
        .collect())
}

/// CSV with columns `papr_db,ccdf`.
pub fn write_ccdf_csv<W: Write>(curve: &[(f64, f64)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "papr_db,ccdf")?;
    for (x, c) in curve {
        writeln!(w, "{x:.4},{c:.8e}")?;
    }
    Ok(())
}
