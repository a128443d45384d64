//! CP-OFDM and f-OFDM generation, TWTA distortion and spectral metrology.

mod filter;
mod iq;
mod ofdm;
mod spectrum;
mod study;
mod twta;
mod uplink;
mod window;

pub use filter::{apply_fofdm, fft_convolve, frequency_response, FilterSpec, FilterWindow};
pub use iq::{IqBuffer, IQ_MAGIC};
pub use ofdm::{generate_ofdm, generate_ofdm_frame, qam64, OfdmConfig, OfdmFrame};
pub use spectrum::{
    estimate_psd, estimate_psd_with, papr_ccdf, papr_ccdf_curve, write_ccdf_csv, PsdConfig,
    SpectrumEstimate,
};
pub use study::{run_study, StudyConfig, StudyResult};
pub use twta::{apply_twta, interpolate, AmPmTable, TwtaCurve, TwtaModel};
pub use uplink::{
    compose_uplink, dirichlet_leakage, UeTransmission, UplinkComposite, UplinkConfig,
};
pub use window::{bessel_i0, kaiser, raised_cosine_taper};
