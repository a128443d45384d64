//! Scenario configuration: physical constants, architecture options, timer
//! sets and the builtin GEO/LEO scenarios.
//!
//! Scenarios are exchanged as JSON. Unknown keys are rejected and omitted
//! timer fields are filled with the defaults of the scenario's service type.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants used by every geometric computation.
///
/// The defaults reproduce the published delay tables: equatorial Earth
/// radius (6378 km) and `c = 3.0e8 m/s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Speed of light, m/s.
    pub speed_of_light: f64,
    /// Gravitational constant, N·m²/kg².
    pub gravitational_constant: f64,
    /// Earth mass, kg.
    pub earth_mass_kg: f64,
    /// Earth radius, km.
    pub earth_radius_km: f64,
}

impl PhysicalConstants {
    pub const DEFAULT: PhysicalConstants = PhysicalConstants {
        speed_of_light: 3.0e8,
        gravitational_constant: 6.67e-11,
        earth_mass_kg: 5.98e24,
        earth_radius_km: 6378.0,
    };

    /// Same constants with the exact SI speed of light.
    pub fn with_exact_speed_of_light(self) -> Self {
        PhysicalConstants {
            speed_of_light: 299_792_458.0,
            ..self
        }
    }

    /// Same constants with the mean (volumetric) Earth radius.
    pub fn with_mean_earth_radius(self) -> Self {
        PhysicalConstants {
            earth_radius_km: 6371.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("speed_of_light", self.speed_of_light),
            ("gravitational_constant", self.gravitational_constant),
            ("earth_mass_kg", self.earth_mass_kg),
            ("earth_radius_km", self.earth_radius_km),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(field, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// System architecture option.
///
/// A1/A2 are direct access (transparent / regenerative payload), A3/A4 are
/// relay-node backhaul (transparent / regenerative payload).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    A1,
    A2,
    A3,
    A4,
}

impl Architecture {
    /// gNB on board the satellite: procedures terminate there and the feeder
    /// leg drops out of the procedure round trip.
    pub fn is_regenerative(self) -> bool {
        matches!(self, Architecture::A2 | Architecture::A4)
    }

    pub fn uses_relay_nodes(self) -> bool {
        matches!(self, Architecture::A3 | Architecture::A4)
    }

    /// The regenerative counterpart (A1→A2, A3→A4); regenerative options map to themselves.
    pub fn regenerative(self) -> Self {
        match self {
            Architecture::A1 | Architecture::A2 => Architecture::A2,
            Architecture::A3 | Architecture::A4 => Architecture::A4,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Architecture::A1 => "A1",
            Architecture::A2 => "A2",
            Architecture::A3 => "A3",
            Architecture::A4 => "A4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Service {
    #[serde(rename = "eMBB")]
    Embb,
    #[serde(rename = "NB-IoT")]
    NbIot,
}

impl fmt::Display for Service {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Service::Embb => "eMBB",
            Service::NbIot => "NB-IoT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Duplex {
    #[default]
    #[serde(rename = "FDD")]
    Fdd,
}

/// MAC timer and counter configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimerSet {
    pub rar_window_ms: f64,
    pub contention_resolution_ms: f64,
    pub time_alignment_timer_s: f64,
    pub preamble_max_attempts: u32,
    pub contention_max_attempts: u32,
    /// HARQ ACK offset k, in subframes.
    pub harq_ack_offset_k: u32,
    pub nbiot_max_repetitions: u32,
    pub nbiot_coverage_levels: u32,
    pub nbiot_attempts_per_level: u32,
}

impl TimerSet {
    pub const NR_DEFAULT: TimerSet = TimerSet {
        rar_window_ms: 15.0,
        contention_resolution_ms: 64.0,
        time_alignment_timer_s: 10.24,
        preamble_max_attempts: 200,
        contention_max_attempts: 16,
        harq_ack_offset_k: 4,
        nbiot_max_repetitions: 128,
        nbiot_coverage_levels: 3,
        nbiot_attempts_per_level: 10,
    };

    pub const NBIOT_DEFAULT: TimerSet = TimerSet {
        rar_window_ms: 10_240.0,
        contention_resolution_ms: 10_240.0,
        time_alignment_timer_s: 10.24,
        preamble_max_attempts: 30,
        contention_max_attempts: 16,
        harq_ack_offset_k: 4,
        nbiot_max_repetitions: 128,
        nbiot_coverage_levels: 3,
        nbiot_attempts_per_level: 10,
    };

    pub fn defaults_for(service: Service) -> Self {
        match service {
            Service::Embb => Self::NR_DEFAULT,
            Service::NbIot => Self::NBIOT_DEFAULT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("timers.rar_window_ms", self.rar_window_ms),
            (
                "timers.contention_resolution_ms",
                self.contention_resolution_ms,
            ),
            ("timers.time_alignment_timer_s", self.time_alignment_timer_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(field, "must be finite and > 0"));
            }
        }
        for (field, v) in [
            ("timers.preamble_max_attempts", self.preamble_max_attempts),
            (
                "timers.contention_max_attempts",
                self.contention_max_attempts,
            ),
            ("timers.harq_ack_offset_k", self.harq_ack_offset_k),
            ("timers.nbiot_max_repetitions", self.nbiot_max_repetitions),
            ("timers.nbiot_coverage_levels", self.nbiot_coverage_levels),
            (
                "timers.nbiot_attempts_per_level",
                self.nbiot_attempts_per_level,
            ),
        ] {
            if v == 0 {
                return Err(Error::validation(field, "must be > 0"));
            }
        }
        if self.nbiot_max_repetitions > 128 {
            return Err(Error::validation(
                "timers.nbiot_max_repetitions",
                "must be <= 128",
            ));
        }
        if self.nbiot_coverage_levels > 3 {
            return Err(Error::validation(
                "timers.nbiot_coverage_levels",
                "must be <= 3",
            ));
        }
        Ok(())
    }
}

/// The single input to every analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub architecture: Architecture,
    pub service: Service,
    pub h_sat_km: f64,
    pub carrier_dl_hz: f64,
    pub carrier_ul_hz: f64,
    pub elevation_gw_deg: f64,
    pub min_elevation_rx_deg: f64,
    pub mu: u8,
    pub duplex: Duplex,
    pub timers: TimerSet,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        if !(self.h_sat_km.is_finite() && self.h_sat_km > 0.0) {
            return Err(Error::validation("h_sat_km", "must be > 0"));
        }
        for (field, v) in [
            ("carrier_dl_hz", self.carrier_dl_hz),
            ("carrier_ul_hz", self.carrier_ul_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(field, "must be > 0"));
            }
        }
        for (field, v) in [
            ("elevation_gw_deg", self.elevation_gw_deg),
            ("min_elevation_rx_deg", self.min_elevation_rx_deg),
        ] {
            if !(v > 0.0 && v <= 90.0) {
                return Err(Error::validation(field, "must lie in (0, 90]"));
            }
        }
        if self.mu > 5 {
            return Err(Error::validation("mu", format!("{} not in 0..=5", self.mu)));
        }
        self.timers.validate()
    }

    /// Regenerative-payload variant of this scenario (A1→A2, A3→A4).
    pub fn with_regenerative_payload(&self) -> Self {
        let mut s = self.clone();
        s.architecture = self.architecture.regenerative();
        if s.architecture != self.architecture {
            s.name = format!("{}-regen", self.name);
        }
        s
    }

    /// Highest carrier of the two link directions.
    pub fn max_carrier_hz(&self) -> f64 {
        self.carrier_dl_hz.max(self.carrier_ul_hz)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from(self)).expect("scenario serializes")
    }

    pub fn from_json_str(text: &str, source_name: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })?;
        let config = file.resolve();
        config.validate()?;
        Ok(config)
    }
}

/// On-disk form of [`TimerSet`]; every field optional.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimerFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    rar_window_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contention_resolution_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_alignment_timer_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preamble_max_attempts: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contention_max_attempts: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    harq_ack_offset_k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nbiot_max_repetitions: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nbiot_coverage_levels: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nbiot_attempts_per_level: Option<u32>,
}

impl TimerFile {
    fn resolve(self, base: TimerSet) -> TimerSet {
        TimerSet {
            rar_window_ms: self.rar_window_ms.unwrap_or(base.rar_window_ms),
            contention_resolution_ms: self
                .contention_resolution_ms
                .unwrap_or(base.contention_resolution_ms),
            time_alignment_timer_s: self
                .time_alignment_timer_s
                .unwrap_or(base.time_alignment_timer_s),
            preamble_max_attempts: self
                .preamble_max_attempts
                .unwrap_or(base.preamble_max_attempts),
            contention_max_attempts: self
                .contention_max_attempts
                .unwrap_or(base.contention_max_attempts),
            harq_ack_offset_k: self.harq_ack_offset_k.unwrap_or(base.harq_ack_offset_k),
            nbiot_max_repetitions: self
                .nbiot_max_repetitions
                .unwrap_or(base.nbiot_max_repetitions),
            nbiot_coverage_levels: self
                .nbiot_coverage_levels
                .unwrap_or(base.nbiot_coverage_levels),
            nbiot_attempts_per_level: self
                .nbiot_attempts_per_level
                .unwrap_or(base.nbiot_attempts_per_level),
        }
    }
}

impl From<TimerSet> for TimerFile {
    fn from(t: TimerSet) -> Self {
        TimerFile {
            rar_window_ms: Some(t.rar_window_ms),
            contention_resolution_ms: Some(t.contention_resolution_ms),
            time_alignment_timer_s: Some(t.time_alignment_timer_s),
            preamble_max_attempts: Some(t.preamble_max_attempts),
            contention_max_attempts: Some(t.contention_max_attempts),
            harq_ack_offset_k: Some(t.harq_ack_offset_k),
            nbiot_max_repetitions: Some(t.nbiot_max_repetitions),
            nbiot_coverage_levels: Some(t.nbiot_coverage_levels),
            nbiot_attempts_per_level: Some(t.nbiot_attempts_per_level),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    architecture: Architecture,
    service: Service,
    h_sat_km: f64,
    carrier_dl_hz: f64,
    carrier_ul_hz: f64,
    elevation_gw_deg: f64,
    min_elevation_rx_deg: f64,
    mu: u8,
    #[serde(default)]
    duplex: Duplex,
    #[serde(default)]
    timers: TimerFile,
}

impl ScenarioFile {
    fn resolve(self) -> ScenarioConfig {
        let base = TimerSet::defaults_for(self.service);
        ScenarioConfig {
            name: self.name,
            architecture: self.architecture,
            service: self.service,
            h_sat_km: self.h_sat_km,
            carrier_dl_hz: self.carrier_dl_hz,
            carrier_ul_hz: self.carrier_ul_hz,
            elevation_gw_deg: self.elevation_gw_deg,
            min_elevation_rx_deg: self.min_elevation_rx_deg,
            mu: self.mu,
            duplex: self.duplex,
            timers: self.timers.resolve(base),
        }
    }
}

impl From<&ScenarioConfig> for ScenarioFile {
    fn from(c: &ScenarioConfig) -> Self {
        ScenarioFile {
            name: c.name.clone(),
            architecture: c.architecture,
            service: c.service,
            h_sat_km: c.h_sat_km,
            carrier_dl_hz: c.carrier_dl_hz,
            carrier_ul_hz: c.carrier_ul_hz,
            elevation_gw_deg: c.elevation_gw_deg,
            min_elevation_rx_deg: c.min_elevation_rx_deg,
            mu: c.mu,
            duplex: c.duplex,
            timers: c.timers.into(),
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_json_str(&text, &path.display().to_string())
}

pub const EMBB_GEO: &str = "embb_geo";
pub const NBIOT_LEO600: &str = "nbiot_leo600";
pub const NBIOT_LEO1500: &str = "nbiot_leo1500";

/// GEO relay-node backhaul at Ka band, architecture A3.
pub fn embb_geo() -> ScenarioConfig {
    ScenarioConfig {
        name: EMBB_GEO.to_string(),
        architecture: Architecture::A3,
        service: Service::Embb,
        h_sat_km: 35_786.0,
        carrier_dl_hz: 20.0e9,
        carrier_ul_hz: 30.0e9,
        elevation_gw_deg: 5.0,
        min_elevation_rx_deg: 10.0,
        mu: 0,
        duplex: Duplex::Fdd,
        timers: TimerSet::NR_DEFAULT,
    }
}

fn nbiot_leo(name: &str, h_sat_km: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        architecture: Architecture::A1,
        service: Service::NbIot,
        h_sat_km,
        carrier_dl_hz: 2.2e9,
        carrier_ul_hz: 2.0e9,
        elevation_gw_deg: 5.0,
        min_elevation_rx_deg: 10.0,
        mu: 0,
        duplex: Duplex::Fdd,
        timers: TimerSet::NBIOT_DEFAULT,
    }
}

pub fn nbiot_leo600() -> ScenarioConfig {
    nbiot_leo(NBIOT_LEO600, 600.0)
}

pub fn nbiot_leo1500() -> ScenarioConfig {
    nbiot_leo(NBIOT_LEO1500, 1500.0)
}

/// The three reference scenarios: eMBB over GEO (A3) and NB-IoT over LEO at 600 and 1500 km (A1).
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    vec![embb_geo(), nbiot_leo600(), nbiot_leo1500()]
}

/// Looks up a builtin scenario by name (`embb_geo`, `nbiot_leo600`, `nbiot_leo1500`).
pub fn builtin_scenario(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        let all = builtin_scenarios();
        assert_eq!(all.len(), 3);
        for s in &all {
            s.validate().unwrap();
        }
        let heights: Vec<f64> = all.iter().map(|s| s.h_sat_km).collect();
        assert_eq!(heights, vec![35_786.0, 600.0, 1500.0]);
        assert_eq!(all[0].architecture, Architecture::A3);
        assert_eq!(all[0].elevation_gw_deg, 5.0);
        assert_eq!(all[0].min_elevation_rx_deg, 10.0);
        assert!(all[1..].iter().all(|s| s.carrier_dl_hz == 2.2e9));
    }

    #[test]
    fn regenerative_variant() {
        let s = nbiot_leo1500().with_regenerative_payload();
        assert_eq!(s.architecture, Architecture::A2);
        assert_eq!(
            embb_geo().with_regenerative_payload().architecture,
            Architecture::A4
        );
        assert!(s.architecture.is_regenerative());
    }

    #[test]
    fn mu_out_of_range_rejected() {
        let mut s = embb_geo();
        s.mu = 7;
        match s.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "mu"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn omitted_timers_get_service_defaults() {
        let text = r#"{"name":"x","architecture":"A3","service":"eMBB","h_sat_km":35786,
            "carrier_dl_hz":2e10,"carrier_ul_hz":3e10,"elevation_gw_deg":5,
            "min_elevation_rx_deg":10,"mu":0}"#;
        let s = ScenarioConfig::from_json_str(text, "inline").unwrap();
        assert_eq!(s.timers, TimerSet::NR_DEFAULT);
        assert_eq!(s.timers.rar_window_ms, 15.0);
        assert_eq!(s.timers.contention_resolution_ms, 64.0);
    }

    #[test]
    fn partial_timers_merge() {
        let text = r#"{"name":"x","architecture":"A1","service":"NB-IoT","h_sat_km":600,
            "carrier_dl_hz":2.2e9,"carrier_ul_hz":2e9,"elevation_gw_deg":5,
            "min_elevation_rx_deg":10,"mu":0,"timers":{"rar_window_ms":500}}"#;
        let s = ScenarioConfig::from_json_str(text, "inline").unwrap();
        assert_eq!(s.timers.rar_window_ms, 500.0);
        assert_eq!(s.timers.contention_resolution_ms, 10_240.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"name":"x","architecture":"A1","service":"NB-IoT","h_sat_km":600,
            "carrier_dl_hz":2.2e9,"carrier_ul_hz":2e9,"elevation_gw_deg":5,
            "min_elevation_rx_deg":10,"mu":0,"colour":"blue"}"#;
        assert!(matches!(
            ScenarioConfig::from_json_str(text, "inline"),
            Err(Error::Parse { .. })
        ));
        let text = text.replace(r#","colour":"blue""#, r#","timers":{"rar":1}"#);
        assert!(ScenarioConfig::from_json_str(&text, "inline").is_err());
    }

    #[test]
    fn elevation_bounds() {
        let mut s = nbiot_leo600();
        s.min_elevation_rx_deg = 0.0;
        assert!(s.validate().is_err());
        s.min_elevation_rx_deg = 90.0;
        assert!(s.validate().is_ok());
        s.elevation_gw_deg = 90.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn repetition_cap() {
        let mut s = nbiot_leo600();
        s.timers.nbiot_max_repetitions = 256;
        assert!(s.validate().is_err());
    }

    #[test]
    fn constants_overrides() {
        let c = PhysicalConstants::default().with_exact_speed_of_light();
        assert_eq!(c.speed_of_light, 299_792_458.0);
        assert_eq!(c.earth_radius_km, 6378.0);
        assert_eq!(
            PhysicalConstants::default()
                .with_mean_earth_radius()
                .earth_radius_km,
            6371.0
        );
    }
}
