use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use super::iq::IqBuffer;
use crate::error::{Error, Result};

/// Gray-coded 64QAM levels per axis, indexed by the 3-bit label.
const GRAY_LEVELS: [f64; 8] = [-7.0, -5.0, -1.0, -3.0, 7.0, 5.0, 1.0, 3.0];

/// Unit-average-power Gray 64QAM symbol for a 6-bit label.
pub fn qam64(label: u8) -> Complex64 {
    let scale = 1.0 / 42f64.sqrt();
    let i = GRAY_LEVELS[(label >> 3 & 7) as usize];
    let q = GRAY_LEVELS[(label & 7) as usize];
    Complex64::new(i * scale, q * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmConfig {
    pub fft_size: usize,
    pub used_subcarriers: usize,
    pub cp_length: usize,
    pub n_symbols: usize,
    /// Integer oversampling; the transform grows to `fft_size·oversampling`.
    pub oversampling: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            fft_size: 1024,
            used_subcarriers: 600,
            cp_length: 72,
            n_symbols: 200,
            oversampling: 1,
        }
    }
}

impl OfdmConfig {
    pub fn with_symbols(mut self, n: usize) -> Self {
        self.n_symbols = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 2 || self.n_symbols == 0 || self.oversampling == 0 {
            return Err(Error::validation(
                "ofdm",
                "fft_size >= 2, n_symbols >= 1 and oversampling >= 1 required",
            ));
        }
        if self.used_subcarriers == 0
            || !self.used_subcarriers.is_multiple_of(2)
            || self.used_subcarriers >= self.fft_size
        {
            return Err(Error::validation(
                "used_subcarriers",
                "must be even, positive and below fft_size",
            ));
        }
        if self.cp_length >= self.fft_size {
            return Err(Error::validation("cp_length", "must be below fft_size"));
        }
        Ok(())
    }

    pub fn transform_size(&self) -> usize {
        self.fft_size * self.oversampling
    }

    pub fn symbol_length(&self) -> usize {
        (self.fft_size + self.cp_length) * self.oversampling
    }

    /// Occupied half bandwidth in cycles per sample, including half a
    /// subcarrier beyond the outermost tone.
    pub fn occupied_half_band(&self) -> f64 {
        (self.used_subcarriers as f64 / 2.0 + 0.5) / self.transform_size() as f64
    }

    /// FFT bins of the occupied subcarriers, DC excluded.
    pub fn subcarrier_bins(&self) -> Vec<usize> {
        let m = self.transform_size();
        let half = self.used_subcarriers / 2;
        (1..=half)
            .map(|k| m - half - 1 + k)
            .chain(1..=half)
            .collect()
    }
}

/// Time samples and the frequency-domain symbols they carry.
#[derive(Debug, Clone)]
pub struct OfdmFrame {
    pub buffer: IqBuffer,
    /// `grid[symbol][bin]` over the full transform.
    pub grid: Vec<Vec<Complex64>>,
}

pub fn generate_ofdm(config: &OfdmConfig, seed: u64) -> Result<IqBuffer> {
    Ok(generate_ofdm_frame(config, seed)?.buffer)
}

/// CP-OFDM with random Gray 64QAM data and a unitary inverse transform.
pub fn generate_ofdm_frame(config: &OfdmConfig, seed: u64) -> Result<OfdmFrame> {
    config.validate()?;
    let m = config.transform_size();
    let cp = config.cp_length * config.oversampling;
    let bins = config.subcarrier_bins();
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (m as f64).sqrt();
    let mut samples = Vec::with_capacity(config.n_symbols * (m + cp));
    let mut grid = Vec::with_capacity(config.n_symbols);
    let mut scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
    for _ in 0..config.n_symbols {
        let mut x = vec![Complex64::default(); m];
        for &b in &bins {
            x[b] = qam64(rng.gen_range(0..64));
        }
        grid.push(x.clone());
        ifft.process_with_scratch(&mut x, &mut scratch);
        x.iter_mut().for_each(|v| *v *= scale);
        samples.extend_from_slice(&x[m - cp..]);
        samples.extend_from_slice(&x);
    }
    let buffer = IqBuffer::new(samples, config.oversampling as f64)
        .with_band(config.occupied_half_band())
        .with_stage(format!(
            "ofdm(n={},used={},cp={},seed={seed})",
            config.fft_size, config.used_subcarriers, config.cp_length
        ));
    Ok(OfdmFrame { buffer, grid })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constellation_has_unit_power_and_gray_neighbours() {
        let p: f64 = (0..64u8).map(|l| qam64(l).norm_sqr()).sum::<f64>() / 64.0;
        assert!((p - 1.0).abs() < 1e-14);
        for a in 0..8usize {
            for b in 0..8usize {
                let da = (GRAY_LEVELS[a] - GRAY_LEVELS[b]).abs();
                if da == 2.0 {
                    assert_eq!((a ^ b).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn one_symbol_length() {
        let b = generate_ofdm(&OfdmConfig::default().with_symbols(1), 0).unwrap();
        assert_eq!(b.len(), 1096);
    }

    #[test]
    fn bins_are_centered_without_dc() {
        let c = OfdmConfig::default();
        let bins = c.subcarrier_bins();
        assert_eq!(bins.len(), 600);
        assert!(!bins.contains(&0));
        assert!(bins.contains(&300) && !bins.contains(&301));
        assert!(bins.contains(&(1024 - 300)) && !bins.contains(&(1024 - 301)));
    }

    #[test]
    fn parseval_per_symbol() {
        let c = OfdmConfig::default().with_symbols(3);
        let f = generate_ofdm_frame(&c, 4).unwrap();
        for (s, x) in f.grid.iter().enumerate() {
            let body = &f.buffer.samples[s * 1096 + 72..(s + 1) * 1096];
            let et: f64 = body.iter().map(|v| v.norm_sqr()).sum();
            let ef: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            assert!((et - ef).abs() / ef < 1e-12);
        }
    }

    #[test]
    fn cp_copies_tail() {
        let b = generate_ofdm(&OfdmConfig::default().with_symbols(2), 1).unwrap();
        for s in 0..2 {
            let sym = &b.samples[s * 1096..(s + 1) * 1096];
            assert_eq!(&sym[..72], &sym[1024..]);
        }
    }

    #[test]
    fn deterministic() {
        let c = OfdmConfig::default().with_symbols(2);
        assert_eq!(generate_ofdm(&c, 3).unwrap(), generate_ofdm(&c, 3).unwrap());
        assert_ne!(generate_ofdm(&c, 3).unwrap(), generate_ofdm(&c, 4).unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = OfdmConfig::default();
        c.used_subcarriers = 1024;
        assert!(c.validate().is_err());
    }
}
