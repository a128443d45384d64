use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::iq::IqBuffer;
use super::window::{kaiser, raised_cosine_taper};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterWindow {
    Kaiser {
        beta: f64,
    },
    /// Raised-cosine ramps over the outer `fraction` of taps on each side.
    RaisedCosine {
        fraction: f64,
    },
}

/// Windowed-sinc sub-band filter for f-OFDM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub length: usize,
    /// Occupied half band (cycles/sample) the filter is designed for.
    pub half_band: f64,
    /// Cutoff as a multiple of `half_band`.
    pub cutoff_factor: f64,
    pub window: FilterWindow,
}

impl FilterSpec {
    pub fn for_band(half_band: f64) -> Self {
        FilterSpec {
            length: 513,
            half_band,
            cutoff_factor: 1.1,
            window: FilterWindow::Kaiser { beta: 10.0 },
        }
    }

    pub fn with_window(mut self, window: FilterWindow) -> Self {
        self.window = window;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 || self.length.is_multiple_of(2) {
            return Err(Error::validation("filter.length", "must be odd"));
        }
        let fc = self.cutoff();
        if !(self.half_band > 0.0 && fc < 0.5) {
            return Err(Error::validation(
                "filter.half_band",
                "cutoff must lie in (0, 0.5)",
            ));
        }
        Ok(())
    }

    pub fn cutoff(&self) -> f64 {
        self.half_band * self.cutoff_factor
    }

    /// Linear-phase taps normalized to unit DC gain.
    pub fn taps(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let l = self.length;
        let w = match self.window {
            FilterWindow::Kaiser { beta } => kaiser(l, beta),
            FilterWindow::RaisedCosine { fraction } => raised_cosine_taper(l, fraction),
        };
        let fc = self.cutoff();
        let mid = (l - 1) / 2;
        let mut h = vec![0.0; l];
        for i in 0..=mid {
            let n = (mid - i) as f64;
            let sinc = if n == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * n).sin() / (PI * n)
            };
            h[i] = sinc * w[i];
            h[l - 1 - i] = h[i];
        }
        // Pairwise sum keeps the normalization symmetric and exact to rounding.
        let sum = h[mid] + 2.0 * h[..mid].iter().rev().sum::<f64>();
        h.iter_mut().for_each(|v| *v /= sum);
        Ok(h)
    }
}

/// Frequency response of real taps at normalized frequency `f`, referenced to the center tap.
pub fn frequency_response(taps: &[f64], f: f64) -> Complex64 {
    let mid = (taps.len() - 1) as f64 / 2.0;
    taps.iter()
        .enumerate()
        .map(|(n, &h)| Complex64::from_polar(h, -2.0 * PI * f * (n as f64 - mid)))
        .sum()
}

/// Full linear convolution by FFT overlap-add; output length `x + h - 1`.
pub fn fft_convolve(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    let nfft = (4 * h.len()).next_power_of_two().max(256);
    let block = nfft - h.len() + 1;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);
    let mut hf: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    hf.resize(nfft, Complex64::default());
    fwd.process(&mut hf);
    let scale = 1.0 / nfft as f64;
    let mut out = vec![Complex64::default(); out_len];
    let mut buf = vec![Complex64::default(); nfft];
    for start in (0..x.len()).step_by(block) {
        let end = (start + block).min(x.len());
        buf.fill(Complex64::default());
        buf[..end - start].copy_from_slice(&x[start..end]);
        fwd.process(&mut buf);
        buf.iter_mut().zip(&hf).for_each(|(a, b)| *a *= b * scale);
        inv.process(&mut buf);
        let valid = (end - start + h.len() - 1).min(out_len - start);
        for (o, v) in out[start..start + valid].iter_mut().zip(&buf[..valid]) {
            *o += v;
        }
    }
    out
}

/// Sub-band filtering that turns CP-OFDM into f-OFDM.
pub fn apply_fofdm(buffer: &IqBuffer, filter: &FilterSpec) -> Result<IqBuffer> {
    if let Some(band) = buffer.occupied_half_band {
        if (band - filter.half_band).abs() > 1e-9 * band {
            return Err(Error::MismatchedBand {
                filter: filter.half_band,
                buffer: band,
            });
        }
    }
    let taps = filter.taps()?;
    let y = fft_convolve(&buffer.samples, &taps);
    Ok(buffer.derive(
        y,
        format!("fofdm(L={},cutoff={:.6})", filter.length, filter.cutoff()),
    ))
}
