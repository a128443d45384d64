use super::filter::{apply_fofdm, FilterSpec};
use super::iq::IqBuffer;
use super::ofdm::{generate_ofdm, OfdmConfig};
use super::spectrum::{estimate_psd_with, papr_ccdf, papr_ccdf_curve, PsdConfig, SpectrumEstimate};
use super::twta::{apply_twta, interpolate, TwtaModel};
use crate::error::Result;

/// OFDM vs f-OFDM comparison, linear and through the TWTA.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub ofdm: OfdmConfig,
    pub filter: FilterSpec,
    pub twta: TwtaModel,
    /// Oversampling applied ahead of the amplifier.
    pub twta_oversampling: usize,
    pub psd: PsdConfig,
    pub papr_probability: f64,
    /// Thresholds (dB) at which the CCDF curves are sampled.
    pub ccdf_thresholds_db: Vec<f64>,
    pub seed: u64,
}

impl StudyConfig {
    pub fn new(ibo_db: f64, seed: u64) -> Self {
        let ofdm = OfdmConfig::default();
        StudyConfig {
            filter: FilterSpec::for_band(ofdm.occupied_half_band()),
            ofdm,
            twta: TwtaModel::saleh(ibo_db),
            twta_oversampling: 4,
            psd: PsdConfig::default(),
            papr_probability: 1e-3,
            ccdf_thresholds_db: (0..=130).map(|i| f64::from(i) / 10.0).collect(),
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub ofdm: SpectrumEstimate,
    pub fofdm: SpectrumEstimate,
    pub ofdm_twta: SpectrumEstimate,
    pub fofdm_twta: SpectrumEstimate,
    pub ofdm_papr_db: f64,
    pub fofdm_papr_db: f64,
    /// `(papr_db, ccdf)` pairs.
    pub ofdm_ccdf: Vec<(f64, f64)>,
    pub fofdm_ccdf: Vec<(f64, f64)>,
}

impl StudyResult {
    pub fn linear_gap_db(&self) -> f64 {
        self.fofdm.oobe_suppression_db - self.ofdm.oobe_suppression_db
    }

    pub fn twta_gap_db(&self) -> f64 {
        self.fofdm_twta.oobe_suppression_db - self.ofdm_twta.oobe_suppression_db
    }
}

fn spectrum(buffer: &IqBuffer, cfg: &PsdConfig) -> Result<SpectrumEstimate> {
    let band = buffer
        .occupied_half_band
        .expect("study buffers carry their band");
    estimate_psd_with(buffer, band, cfg)
}

fn through_twta(buffer: &IqBuffer, cfg: &StudyConfig) -> Result<SpectrumEstimate> {
    let up = interpolate(buffer, cfg.twta_oversampling)?;
    spectrum(&apply_twta(&up, &cfg.twta)?, &cfg.psd)
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    let x = generate_ofdm(&cfg.ofdm, cfg.seed)?;
    let y = apply_fofdm(&x, &cfg.filter)?;
    let ((ofdm, ofdm_twta), (fofdm, fofdm_twta)) = rayon::join(
        || (spectrum(&x, &cfg.psd), through_twta(&x, cfg)),
        || (spectrum(&y, &cfg.psd), through_twta(&y, cfg)),
    );
    Ok(StudyResult {
        ofdm_papr_db: papr_ccdf(&x, cfg.papr_probability)?,
        fofdm_papr_db: papr_ccdf(&y, cfg.papr_probability)?,
        ofdm_ccdf: papr_ccdf_curve(&x, &cfg.ccdf_thresholds_db)?,
        fofdm_ccdf: papr_ccdf_curve(&y, &cfg.ccdf_thresholds_db)?,
        ofdm: ofdm?,
        ofdm_twta: ofdm_twta?,
        fofdm: fofdm?,
        fofdm_twta: fofdm_twta?,
    })
}
