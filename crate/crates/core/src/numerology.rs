//! NR / NB-IoT numerology arithmetic: subcarrier spacing, TTI, timing
//! advance quantisation and HARQ process dimensioning.

use crate::error::{Error, Result};
use crate::scenario::PhysicalConstants;

/// Maximum subcarrier spacing Δf_max (Hz) used by the NR basic time unit.
pub const DELTA_F_MAX_HZ: f64 = 480_000.0;
pub const N_F: f64 = 4096.0;
/// NR basic time unit T_C (s).
pub const T_C: f64 = 1.0 / (DELTA_F_MAX_HZ * N_F);
/// LTE / NB-IoT basic time unit T_s (s).
pub const T_S: f64 = 1.0 / (15_000.0 * 2048.0);
pub const PRB_SUBCARRIERS: u32 = 12;

/// Largest NR timing advance command in a random access response.
pub const NR_MAX_TA_COMMAND: u16 = 1282;
/// Largest NB-IoT timing advance (s).
pub const NBIOT_MAX_TA_S: f64 = 0.67e-3;
/// NR HARQ process count supported by the standard.
pub const NR_MAX_HARQ_PROCESSES: u32 = 16;

/// Subframe offset after which an NR TA command takes effect.
pub const NR_TA_APPLY_OFFSET_SUBFRAMES: u64 = 6;
/// Subframe offset after which an NB-IoT TA command takes effect (end of n+12).
pub const NBIOT_TA_APPLY_OFFSET_SUBFRAMES: u64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Numerology {
    mu: u8,
}

impl Numerology {
    pub fn new(mu: u8) -> Result<Self> {
        if mu > 5 {
            return Err(Error::Range {
                what: "mu",
                value: mu as f64,
                min: 0.0,
                max: 5.0,
            });
        }
        Ok(Numerology { mu })
    }

    pub fn mu(self) -> u8 {
        self.mu
    }

    pub fn scs_khz(self) -> f64 {
        15.0 * f64::from(1u32 << self.mu)
    }

    pub fn tti_ms(self) -> f64 {
        1.0 / f64::from(1u32 << self.mu)
    }

    /// Time advanced per unit of TA command (s).
    pub fn ta_step_s(self) -> f64 {
        16.0 * 64.0 / f64::from(1u32 << self.mu) * T_C
    }
}

/// A timing advance command with its quantisation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaCommand {
    /// NR: `N_TA = T_A·16·64/2^mu` in units of T_C, with `N_TA,offset = 0` (FDD).
    Nr { t_a: u16, mu: u8 },
    /// NB-IoT / LTE: `N_TA = T_A·16` in units of T_s.
    NbIot { t_a: u32 },
}

impl TaCommand {
    pub fn nr(t_a: u16, mu: u8) -> Result<Self> {
        if t_a > NR_MAX_TA_COMMAND {
            return Err(Error::Range {
                what: "T_A",
                value: t_a as f64,
                min: 0.0,
                max: NR_MAX_TA_COMMAND as f64,
            });
        }
        Numerology::new(mu)?;
        Ok(TaCommand::Nr { t_a, mu })
    }

    pub fn nbiot(t_a: u32) -> Result<Self> {
        let max = nbiot_max_ta_command();
        if t_a > max {
            return Err(Error::Range {
                what: "T_A",
                value: t_a as f64,
                min: 0.0,
                max: max as f64,
            });
        }
        Ok(TaCommand::NbIot { t_a })
    }

    /// Timing offset `N_TA` in the command's native time unit.
    pub fn n_ta(self) -> f64 {
        match self {
            TaCommand::Nr { t_a, mu } => f64::from(t_a) * 16.0 * 64.0 / f64::from(1u32 << mu),
            TaCommand::NbIot { t_a } => f64::from(t_a) * 16.0,
        }
    }

    /// Advance applied to the uplink frame (s).
    pub fn time_s(self) -> f64 {
        match self {
            TaCommand::Nr { .. } => T_C * self.n_ta(),
            TaCommand::NbIot { .. } => T_S * self.n_ta(),
        }
    }

    pub fn apply_offset_subframes(self) -> u64 {
        match self {
            TaCommand::Nr { .. } => NR_TA_APPLY_OFFSET_SUBFRAMES,
            TaCommand::NbIot { .. } => NBIOT_TA_APPLY_OFFSET_SUBFRAMES,
        }
    }
}

/// NR timing advance (s) for command `t_a` at numerology `mu`.
pub fn ta_time(t_a: u16, mu: u8) -> Result<f64> {
    Ok(TaCommand::nr(t_a, mu)?.time_s())
}

/// Distance resolution (m) of one TA step: `c·T_TA(1)/2`.
pub fn ta_distance_step(mu: u8) -> Result<f64> {
    ta_distance_step_with(&PhysicalConstants::DEFAULT, mu)
}

pub fn ta_distance_step_with(c: &PhysicalConstants, mu: u8) -> Result<f64> {
    Ok(c.speed_of_light * ta_time(1, mu)? / 2.0)
}

/// Largest distance (km) the maximum TA command can compensate.
pub fn max_compensable_distance(mu: u8) -> Result<f64> {
    max_compensable_distance_with(&PhysicalConstants::DEFAULT, mu)
}

pub fn max_compensable_distance_with(c: &PhysicalConstants, mu: u8) -> Result<f64> {
    Ok(c.speed_of_light * ta_time(NR_MAX_TA_COMMAND, mu)? / 2.0 / 1e3)
}

/// Largest NB-IoT command whose advance stays within [`NBIOT_MAX_TA_S`].
pub fn nbiot_max_ta_command() -> u32 {
    (NBIOT_MAX_TA_S / (16.0 * T_S)).floor() as u32
}

/// NB-IoT timing advance (s) for command `t_a`.
pub fn nbiot_ta_time(t_a: u32) -> Result<f64> {
    Ok(TaCommand::nbiot(t_a)?.time_s())
}

/// Slant-range difference (km) a TA budget of `max_ta_s` can absorb.
pub fn differential_delay_limit(max_ta_s: f64) -> f64 {
    differential_delay_limit_with(&PhysicalConstants::DEFAULT, max_ta_s)
}

pub fn differential_delay_limit_with(c: &PhysicalConstants, max_ta_s: f64) -> f64 {
    c.speed_of_light * max_ta_s / 2.0 / 1e3
}

/// Bits needed to address `n_processes` HARQ processes (0 for a single process).
pub fn dci_bits(n_processes: u32) -> u32 {
    match n_processes {
        0 | 1 => 0,
        n => 32 - (n - 1).leading_zeros(),
    }
}

/// Minimum HARQ process count and its side effects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarqDimensioning {
    pub t_owp_ms: f64,
    pub t_proc_ms: f64,
    pub tti_ms: f64,
    /// `2·(t_owp + t_proc)`
    pub t_harq_ms: f64,
    pub n_min: u32,
    pub dci_bits: u32,
    /// Soft-buffer size proxy, `n_min·TTI`.
    pub buffer_units: f64,
}

pub fn harq_dimension(t_owp_ms: f64, t_proc_ms: f64, tti_ms: f64) -> Result<HarqDimensioning> {
    for (field, v) in [
        ("t_owp_ms", t_owp_ms),
        ("t_proc_ms", t_proc_ms),
        ("tti_ms", tti_ms),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::validation(field, "must be > 0"));
        }
    }
    let t_harq_ms = 2.0 * (t_owp_ms + t_proc_ms);
    // Tolerate representation error so that e.g. 8.0/1.0 does not round up to 9.
    let n_min = ((t_harq_ms / tti_ms) - 1e-9).ceil().max(1.0) as u32;
    Ok(HarqDimensioning {
        t_owp_ms,
        t_proc_ms,
        tti_ms,
        t_harq_ms,
        n_min,
        dci_bits: dci_bits(n_min),
        buffer_units: f64::from(n_min) * tti_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scs_times_tti_is_fifteen() {
        for mu in 0..=5 {
            let n = Numerology::new(mu).unwrap();
            assert_eq!(n.scs_khz() * n.tti_ms(), 15.0);
        }
        assert!(Numerology::new(6).is_err());
    }

    #[test]
    fn basic_time_unit() {
        assert_relative_eq!(T_C, 5.086e-10, max_relative = 1e-3);
    }

    #[test]
    fn ta_spot_values() {
        assert_relative_eq!(ta_time(1282, 0).unwrap(), 0.6667e-3, max_relative = 5e-3);
        assert_relative_eq!(ta_time(1282, 5).unwrap(), 0.0209e-3, max_relative = 5e-3);
        assert_eq!(ta_time(0, 3).unwrap(), 0.0);
        // 16·64·T_C
        assert_relative_eq!(ta_time(1, 0).unwrap(), 0.520_833e-6, max_relative = 1e-5);
        assert!(ta_time(1283, 0).is_err());
        assert!(ta_time(10, 6).is_err());
    }

    #[test]
    fn ta_scaling() {
        for mu in 0..=5u8 {
            let base = ta_time(1, 0).unwrap() / f64::from(1u32 << mu);
            assert_relative_eq!(ta_time(1, mu).unwrap(), base, max_relative = 1e-14);
            assert_relative_eq!(
                ta_distance_step(mu).unwrap(),
                ta_distance_step(0).unwrap() / f64::from(1u32 << mu),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn distances() {
        assert_relative_eq!(ta_distance_step(0).unwrap(), 78.125, max_relative = 1e-9);
        assert_relative_eq!(ta_distance_step(5).unwrap(), 2.441, max_relative = 1e-3);
        assert_relative_eq!(
            max_compensable_distance(0).unwrap(),
            100.0,
            max_relative = 5e-3
        );
        assert_relative_eq!(
            max_compensable_distance(5).unwrap(),
            3.135,
            max_relative = 5e-3
        );
    }

    #[test]
    fn nbiot_ta() {
        assert_eq!(nbiot_ta_time(0).unwrap(), 0.0);
        assert_relative_eq!(nbiot_ta_time(1).unwrap(), 16.0 / (15_000.0 * 2048.0));
        let max = nbiot_ta_time(nbiot_max_ta_command()).unwrap();
        assert!(max <= NBIOT_MAX_TA_S);
        assert!((max - 0.67e-3).abs() < 16.0 * T_S);
        assert!(nbiot_ta_time(nbiot_max_ta_command() + 1).is_err());
    }

    #[test]
    fn differential_limits() {
        assert_relative_eq!(
            differential_delay_limit(0.6667e-3),
            100.0,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            differential_delay_limit(0.67e-3),
            100.5,
            max_relative = 1e-9
        );
        assert_eq!(differential_delay_limit(0.0), 0.0);
    }

    #[test]
    fn harq_examples() {
        let d = harq_dimension(1.0, 3.0, 1.0).unwrap();
        assert_eq!((d.t_harq_ms, d.n_min), (8.0, 8));
        let d = harq_dimension(272.37, 5.0, 1.0).unwrap();
        assert_eq!((d.n_min, d.dci_bits), (555, 10));
        assert_eq!(harq_dimension(1.0, 3.0, 0.5).unwrap().n_min, 16);
        assert_eq!(harq_dimension(0.0001, 0.0001, 1.0).unwrap().n_min, 1);
        assert!(harq_dimension(0.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn dci_widths() {
        assert_eq!(dci_bits(1), 0);
        assert_eq!(dci_bits(2), 1);
        assert_eq!(dci_bits(8), 3);
        assert_eq!(dci_bits(16), 4);
        assert_eq!(dci_bits(17), 5);
        assert_eq!(dci_bits(555), 10);
    }

    #[test]
    fn buffer_units_scale_with_processes() {
        let d = harq_dimension(10.0, 3.0, 0.5).unwrap();
        assert_eq!(d.buffer_units, f64::from(d.n_min) * 0.5);
    }
}
