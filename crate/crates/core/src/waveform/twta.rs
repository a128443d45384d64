use num_complex::Complex64;
use rustfft::FftPlanner;

use super::iq::IqBuffer;
use crate::error::{Error, Result};

/// Tabulated AM/AM and AM/PM response, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct AmPmTable {
    pub input_amplitude: Vec<f64>,
    pub output_amplitude: Vec<f64>,
    pub phase_rad: Vec<f64>,
}

impl AmPmTable {
    pub fn validate(&self) -> Result<()> {
        let n = self.input_amplitude.len();
        if n < 2 || self.output_amplitude.len() != n || self.phase_rad.len() != n {
            return Err(Error::validation(
                "twta.table",
                "needs at least two rows of equal length",
            ));
        }
        if self.input_amplitude[0] != 0.0 || self.input_amplitude.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "twta.table",
                "input amplitudes must start at 0 and increase",
            ));
        }
        Ok(())
    }

    fn lookup(&self, r: f64) -> (f64, f64) {
        let x = &self.input_amplitude;
        let i = match x.partition_point(|&v| v <= r) {
            0 => 0,
            p if p >= x.len() => x.len() - 2,
            p => p - 1,
        };
        let t = ((r - x[i]) / (x[i + 1] - x[i])).clamp(0.0, 1.0);
        let lerp = |y: &[f64]| y[i] + t * (y[i + 1] - y[i]);
        (lerp(&self.output_amplitude), lerp(&self.phase_rad))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TwtaCurve {
    Saleh {
        alpha_a: f64,
        beta_a: f64,
        alpha_phi: f64,
        beta_phi: f64,
    },
    Table(AmPmTable),
}

/// Memoryless travelling-wave tube amplifier driven at a given input back-off.
#[derive(Debug, Clone, PartialEq)]
pub struct TwtaModel {
    pub curve: TwtaCurve,
    pub ibo_db: f64,
}

impl TwtaModel {
    pub fn saleh(ibo_db: f64) -> Self {
        TwtaModel {
            curve: TwtaCurve::Saleh {
                alpha_a: 2.1587,
                beta_a: 1.1517,
                alpha_phi: 4.0033,
                beta_phi: 9.1040,
            },
            ibo_db,
        }
    }

    pub fn from_table(table: AmPmTable, ibo_db: f64) -> Result<Self> {
        table.validate()?;
        Ok(TwtaModel {
            curve: TwtaCurve::Table(table),
            ibo_db,
        })
    }

    /// Input amplitude at which the AM/AM curve peaks.
    pub fn saturation_input(&self) -> f64 {
        match &self.curve {
            TwtaCurve::Saleh { beta_a, .. } => 1.0 / beta_a.sqrt(),
            TwtaCurve::Table(t) => {
                let (i, _) = t.output_amplitude.iter().enumerate().fold(
                    (0, f64::MIN),
                    |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
                );
                t.input_amplitude[i]
            }
        }
    }

    pub fn small_signal_gain(&self) -> f64 {
        match &self.curve {
            TwtaCurve::Saleh { alpha_a, .. } => *alpha_a,
            TwtaCurve::Table(t) => t.output_amplitude[1] / t.input_amplitude[1],
        }
    }

    pub fn am_am(&self, r: f64) -> f64 {
        self.response(r).0
    }

    pub fn am_pm(&self, r: f64) -> f64 {
        self.response(r).1
    }

    fn response(&self, r: f64) -> (f64, f64) {
        match &self.curve {
            TwtaCurve::Saleh {
                alpha_a,
                beta_a,
                alpha_phi,
                beta_phi,
            } => {
                let r2 = r * r;
                (
                    alpha_a * r / (1.0 + beta_a * r2),
                    alpha_phi * r2 / (1.0 + beta_phi * r2),
                )
            }
            TwtaCurve::Table(t) => t.lookup(r),
        }
    }

    /// Applies the curve to samples that are already at the drive level.
    pub fn amplify(&self, x: Complex64) -> Complex64 {
        let r = x.norm();
        if r == 0.0 {
            return Complex64::default();
        }
        let (a, phi) = self.response(r);
        x / r * Complex64::from_polar(a, phi)
    }
}

/// Scales the buffer to `P_sat / 10^(IBO/10)` average power and applies the
/// AM/AM and AM/PM curves sample by sample.
pub fn apply_twta(buffer: &IqBuffer, model: &TwtaModel) -> Result<IqBuffer> {
    if !(model.ibo_db.is_finite() && model.ibo_db >= 0.0) {
        return Err(Error::validation("ibo_db", "must be finite and >= 0"));
    }
    let p = buffer.mean_power();
    if p <= 0.0 {
        return Err(Error::Domain(
            "cannot drive a TWTA with an all-zero buffer".into(),
        ));
    }
    let r_sat = model.saturation_input();
    let target = r_sat * r_sat / 10f64.powf(model.ibo_db / 10.0);
    let g = (target / p).sqrt();
    let y = buffer
        .samples
        .iter()
        .map(|&x| model.amplify(x * g))
        .collect();
    Ok(buffer.derive(y, format!("twta(ibo={} dB)", model.ibo_db)))
}

/// Band-limited interpolation by zero-padding the spectrum of the whole buffer.
pub fn interpolate(buffer: &IqBuffer, factor: usize) -> Result<IqBuffer> {
    if factor == 0 {
        return Err(Error::validation("factor", "must be >= 1"));
    }
    let n = buffer.len();
    if factor == 1 || n == 0 {
        return Ok(buffer.clone());
    }
    let mut planner = FftPlanner::new();
    let mut spec = buffer.samples.clone();
    planner.plan_fft_forward(n).process(&mut spec);
    let m = n * factor;
    let mut padded = vec![Complex64::default(); m];
    let h = n / 2;
    padded[..h].copy_from_slice(&spec[..h]);
    padded[m - (n - h)..].copy_from_slice(&spec[h..]);
    planner.plan_fft_inverse(m).process(&mut padded);
    let scale = 1.0 / n as f64;
    padded.iter_mut().for_each(|v| *v *= scale);
    let mut out = buffer.derive(padded, format!("interpolate(x{factor})"));
    out.sample_rate *= factor as f64;
    out.occupied_half_band = buffer.occupied_half_band.map(|b| b / factor as f64);
    Ok(out)
}
