use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const IQ_MAGIC: &[u8; 8] = b"NTNLABIQ";

/// Complex baseband samples with a normalized sample rate and the stages
/// they went through.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    pub samples: Vec<Complex64>,
    /// Relative to the native OFDM rate.
    pub sample_rate: f64,
    /// Occupied half bandwidth in cycles per sample, if known.
    pub occupied_half_band: Option<f64>,
    pub stages: Vec<String>,
}

impl IqBuffer {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        IqBuffer {
            samples,
            sample_rate,
            occupied_half_band: None,
            stages: Vec::new(),
        }
    }

    pub fn with_band(mut self, half_band: f64) -> Self {
        self.occupied_half_band = Some(half_band);
        self
    }

    pub fn with_stage(mut self, stage: impl Into<String>) -> Self {
        self.stages.push(stage.into());
        self
    }

    /// Same metadata, new samples, one more stage.
    pub(crate) fn derive(&self, samples: Vec<Complex64>, stage: impl Into<String>) -> Self {
        let mut out = IqBuffer {
            samples,
            sample_rate: self.sample_rate,
            occupied_half_band: self.occupied_half_band,
            stages: self.stages.clone(),
        };
        out.stages.push(stage.into());
        out
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn is_finite(&self) -> bool {
        self.samples
            .iter()
            .all(|s| s.re.is_finite() && s.im.is_finite())
    }

    /// Writes the magic header followed by little-endian f64 I/Q pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(IQ_MAGIC)?;
        let mut bytes = Vec::with_capacity(self.samples.len() * 16);
        for s in &self.samples {
            bytes.extend_from_slice(&s.re.to_le_bytes());
            bytes.extend_from_slice(&s.im.to_le_bytes());
        }
        w.write_all(&bytes)
    }

    pub fn read_binary<R: Read>(mut r: R, sample_rate: f64) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::Parse {
            source_name: "iq stream".into(),
            message: e.to_string(),
        })?;
        if bytes.len() < 8 || &bytes[..8] != IQ_MAGIC {
            return Err(Error::Parse {
                source_name: "iq stream".into(),
                message: "missing NTNLABIQ header".into(),
            });
        }
        let body = &bytes[8..];
        if body.len() % 16 != 0 {
            return Err(Error::Parse {
                source_name: "iq stream".into(),
                message: format!(
                    "payload of {} bytes is not a whole number of samples",
                    body.len()
                ),
            });
        }
        let samples = body
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Ok(IqBuffer::new(samples, sample_rate))
    }
}
