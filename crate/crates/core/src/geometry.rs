//! Link geometry: slant ranges, propagation delays, round-trip times,
//! satellite pass elevation profiles and Doppler.
//!
//! The pass model assumes a non-rotating spherical Earth, a circular orbit
//! and UEs placed on the sub-satellite ground track. Time zero is the zenith
//! crossing of the reference UE (the first UE of a [`PassGeometry`]).

use std::io::Write;

use crate::error::{Error, Result};
use crate::scenario::{PhysicalConstants, ScenarioConfig};

/// Distance and delay of one satellite path at a given elevation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub h_sat_km: f64,
    pub elevation_deg: f64,
    pub slant_range_km: f64,
    pub one_way_delay_ms: f64,
}

impl LinkGeometry {
    pub fn new(c: &PhysicalConstants, h_sat_km: f64, elevation_deg: f64) -> Result<Self> {
        let slant_range_km = slant_range_with(c, h_sat_km, elevation_deg)?;
        Ok(LinkGeometry {
            h_sat_km,
            elevation_deg,
            slant_range_km,
            one_way_delay_ms: one_way_delay_with(c, slant_range_km),
        })
    }
}

/// Slant range (km) from a ground terminal at `elevation_deg` to a satellite at `h_sat_km`.
pub fn slant_range(h_sat_km: f64, elevation_deg: f64) -> Result<f64> {
    slant_range_with(&PhysicalConstants::DEFAULT, h_sat_km, elevation_deg)
}

pub fn slant_range_with(c: &PhysicalConstants, h_sat_km: f64, elevation_deg: f64) -> Result<f64> {
    if !(h_sat_km.is_finite() && h_sat_km > 0.0) {
        return Err(Error::Domain(format!("altitude {h_sat_km} km must be > 0")));
    }
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(Error::Range {
            what: "elevation_deg",
            value: elevation_deg,
            min: 0.0,
            max: 90.0,
        });
    }
    if elevation_deg == 90.0 {
        return Ok(h_sat_km);
    }
    let r = c.earth_radius_km;
    let s = elevation_deg.to_radians().sin();
    Ok((r * r * s * s + h_sat_km * h_sat_km + 2.0 * r * h_sat_km).sqrt() - r * s)
}

/// Free-space propagation delay (ms) over `range_km`.
pub fn one_way_delay(range_km: f64) -> f64 {
    one_way_delay_with(&PhysicalConstants::DEFAULT, range_km)
}

pub fn one_way_delay_with(c: &PhysicalConstants, range_km: f64) -> f64 {
    range_km * 1e3 / c.speed_of_light * 1e3
}

/// Procedure round trip for a scenario.
///
/// Transparent payloads include the feeder (GW) leg; regenerative payloads
/// terminate procedures on board and only the service leg counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrip {
    pub service: LinkGeometry,
    pub feeder: Option<LinkGeometry>,
    pub one_way_ms: f64,
    pub rtt_ms: f64,
}

pub fn round_trip_time(scenario: &ScenarioConfig) -> Result<RoundTrip> {
    round_trip_time_with(&PhysicalConstants::DEFAULT, scenario)
}

pub fn round_trip_time_with(c: &PhysicalConstants, scenario: &ScenarioConfig) -> Result<RoundTrip> {
    let service = LinkGeometry::new(c, scenario.h_sat_km, scenario.min_elevation_rx_deg)?;
    let feeder = if scenario.architecture.is_regenerative() {
        None
    } else {
        Some(LinkGeometry::new(
            c,
            scenario.h_sat_km,
            scenario.elevation_gw_deg,
        )?)
    };
    let one_way_ms = service.one_way_delay_ms + feeder.map_or(0.0, |f| f.one_way_delay_ms);
    Ok(RoundTrip {
        service,
        feeder,
        one_way_ms,
        rtt_ms: 2.0 * one_way_ms,
    })
}

/// Both single paths of a scenario (service leg first, then GW leg), regardless of payload type.
pub fn path_table(c: &PhysicalConstants, scenario: &ScenarioConfig) -> Result<[LinkGeometry; 2]> {
    Ok([
        LinkGeometry::new(c, scenario.h_sat_km, scenario.min_elevation_rx_deg)?,
        LinkGeometry::new(c, scenario.h_sat_km, scenario.elevation_gw_deg)?,
    ])
}

/// Orbital angular velocity (rad/s) of a circular orbit at `h_sat_km`.
pub fn orbital_angular_velocity(h_sat_km: f64) -> f64 {
    orbital_angular_velocity_with(&PhysicalConstants::DEFAULT, h_sat_km)
}

pub fn orbital_angular_velocity_with(c: &PhysicalConstants, h_sat_km: f64) -> f64 {
    let radius_m = (c.earth_radius_km + h_sat_km) * 1e3;
    (c.gravitational_constant * c.earth_mass_kg / radius_m.powi(3)).sqrt()
}

/// Satellite-motion Doppler (Hz) seen at elevation `elevation_deg`.
///
/// Positive while the satellite approaches the terminal, negative after zenith.
pub fn doppler_shift(carrier_hz: f64, h_sat_km: f64, elevation_deg: f64, approaching: bool) -> f64 {
    doppler_shift_with(
        &PhysicalConstants::DEFAULT,
        carrier_hz,
        h_sat_km,
        elevation_deg,
        approaching,
    )
}

pub fn doppler_shift_with(
    c: &PhysicalConstants,
    carrier_hz: f64,
    h_sat_km: f64,
    elevation_deg: f64,
    approaching: bool,
) -> f64 {
    if elevation_deg == 90.0 {
        return 0.0;
    }
    let magnitude = carrier_hz
        * orbital_angular_velocity_with(c, h_sat_km)
        * c.earth_radius_km
        * 1e3
        * elevation_deg.to_radians().cos()
        / c.speed_of_light;
    if approaching {
        magnitude
    } else {
        -magnitude
    }
}

/// Doppler (Hz) from terminal mobility at `speed_kmh`.
pub fn mobility_doppler(speed_kmh: f64, carrier_hz: f64) -> f64 {
    mobility_doppler_with(&PhysicalConstants::DEFAULT, speed_kmh, carrier_hz)
}

pub fn mobility_doppler_with(c: &PhysicalConstants, speed_kmh: f64, carrier_hz: f64) -> f64 {
    speed_kmh / 3.6 * carrier_hz / c.speed_of_light
}

/// Elevation (deg) of a satellite at `h_sat_km` separated from the terminal by
/// Earth central angle `gamma_rad`. Negative below the horizon.
pub fn elevation_at_central_angle(c: &PhysicalConstants, h_sat_km: f64, gamma_rad: f64) -> f64 {
    if gamma_rad == 0.0 {
        return 90.0;
    }
    let ratio = c.earth_radius_km / (c.earth_radius_km + h_sat_km);
    (gamma_rad.cos() - ratio)
        .atan2(gamma_rad.sin().abs())
        .to_degrees()
}

/// Slant range (km) for Earth central angle `gamma_rad`.
pub fn slant_range_at_central_angle(c: &PhysicalConstants, h_sat_km: f64, gamma_rad: f64) -> f64 {
    let r = c.earth_radius_km;
    let half = (0.5 * gamma_rad).sin();
    (h_sat_km * h_sat_km + 4.0 * r * (r + h_sat_km) * half * half).sqrt()
}

/// Largest central angle (rad) at which the satellite is still above `min_elevation_deg`.
pub fn visibility_half_angle(
    c: &PhysicalConstants,
    h_sat_km: f64,
    min_elevation_deg: f64,
) -> Option<f64> {
    if min_elevation_deg > 90.0 {
        return None;
    }
    let e = min_elevation_deg.to_radians();
    let r = c.earth_radius_km;
    Some(((r * e.cos()) / (r + h_sat_km)).acos() - e)
}

/// Geometry of one satellite pass over a set of UEs on the ground track.
#[derive(Debug, Clone, PartialEq)]
pub struct PassGeometry {
    pub h_sat_km: f64,
    /// Along-track ground offsets (km); the first UE is the reference.
    pub ue_track_offsets_km: Vec<f64>,
    pub min_elevation_deg: f64,
    pub time_step_s: f64,
    pub carrier_hz: f64,
}

impl PassGeometry {
    pub const DEFAULT_MIN_ELEVATION_DEG: f64 = 10.0;
    pub const DEFAULT_TIME_STEP_S: f64 = 0.01;

    pub fn new(h_sat_km: f64, ue_track_offsets_km: Vec<f64>, carrier_hz: f64) -> Self {
        PassGeometry {
            h_sat_km,
            ue_track_offsets_km,
            min_elevation_deg: Self::DEFAULT_MIN_ELEVATION_DEG,
            time_step_s: Self::DEFAULT_TIME_STEP_S,
            carrier_hz,
        }
    }

    /// Reference UE at 0 km and a second UE `separation_km` further along the track.
    pub fn pair(h_sat_km: f64, separation_km: f64, carrier_hz: f64) -> Self {
        Self::new(h_sat_km, vec![0.0, separation_km], carrier_hz)
    }

    pub fn with_time_step(mut self, time_step_s: f64) -> Self {
        self.time_step_s = time_step_s;
        self
    }

    pub fn with_min_elevation(mut self, min_elevation_deg: f64) -> Self {
        self.min_elevation_deg = min_elevation_deg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_sat_km.is_finite() && self.h_sat_km > 0.0) {
            return Err(Error::validation("h_sat_km", "must be > 0"));
        }
        if self.ue_track_offsets_km.is_empty() {
            return Err(Error::validation(
                "ue_track_offsets_km",
                "need at least one UE",
            ));
        }
        if self
            .ue_track_offsets_km
            .iter()
            .any(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(Error::validation(
                "ue_track_offsets_km",
                "offsets must be >= 0",
            ));
        }
        if !(self.time_step_s.is_finite() && self.time_step_s > 0.0) {
            return Err(Error::validation("time_step_s", "must be > 0"));
        }
        if !(self.min_elevation_deg.is_finite() && self.min_elevation_deg >= 0.0) {
            return Err(Error::validation("min_elevation_deg", "must be >= 0"));
        }
        Ok(())
    }

    /// Duration (s) of the reference UE's visibility window.
    pub fn visibility_duration_s(&self, c: &PhysicalConstants) -> f64 {
        match visibility_half_angle(c, self.h_sat_km, self.min_elevation_deg) {
            Some(g) => 2.0 * g / orbital_angular_velocity_with(c, self.h_sat_km),
            None => 0.0,
        }
    }

    fn sample_times(&self, c: &PhysicalConstants) -> Vec<f64> {
        let Some(gamma_max) = visibility_half_angle(c, self.h_sat_km, self.min_elevation_deg)
        else {
            return Vec::new();
        };
        let half = gamma_max / orbital_angular_velocity_with(c, self.h_sat_km);
        let k_max = (half / self.time_step_s + 1e-9).floor() as i64;
        (-k_max..=k_max)
            .map(|k| k as f64 * self.time_step_s)
            .collect()
    }

    fn central_angles(&self, c: &PhysicalConstants, t: f64) -> impl Iterator<Item = f64> + '_ {
        let omega = orbital_angular_velocity_with(c, self.h_sat_km);
        let r = c.earth_radius_km;
        let x0 = self.ue_track_offsets_km[0];
        let wt = omega * t;
        self.ue_track_offsets_km
            .iter()
            .map(move |x| wt - (x - x0) / r)
    }
}

/// Per-UE elevation over a pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationSeries {
    pub time_s: Vec<f64>,
    /// `elevation_deg[ue][sample]`
    pub elevation_deg: Vec<Vec<f64>>,
}

pub fn elevation_series(pass: &PassGeometry) -> Result<ElevationSeries> {
    elevation_series_with(&PhysicalConstants::DEFAULT, pass)
}

pub fn elevation_series_with(
    c: &PhysicalConstants,
    pass: &PassGeometry,
) -> Result<ElevationSeries> {
    pass.validate()?;
    let time_s = pass.sample_times(c);
    let mut elevation_deg = vec![Vec::with_capacity(time_s.len()); pass.ue_track_offsets_km.len()];
    for &t in &time_s {
        for (ue, gamma) in pass.central_angles(c, t).enumerate() {
            elevation_deg[ue].push(elevation_at_central_angle(c, pass.h_sat_km, gamma));
        }
    }
    Ok(ElevationSeries {
        time_s,
        elevation_deg,
    })
}

/// Elevation, slant range and Doppler per UE over a pass, split into the
/// common (reference-UE) part and the per-UE differential part.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerSeries {
    pub time_s: Vec<f64>,
    pub elevation_deg: Vec<Vec<f64>>,
    pub slant_range_km: Vec<Vec<f64>>,
    pub doppler_hz: Vec<Vec<f64>>,
    /// Reference-UE Doppler per sample.
    pub common_hz: Vec<f64>,
    /// `differential_hz[ue][sample]` = Doppler of `ue` minus reference Doppler.
    pub differential_hz: Vec<Vec<f64>>,
}

impl DopplerSeries {
    pub fn n_ues(&self) -> usize {
        self.doppler_hz.len()
    }

    pub fn len(&self) -> usize {
        self.time_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_s.is_empty()
    }

    /// Doppler difference between UEs `i` and `j` at `sample`.
    pub fn pairwise_hz(&self, i: usize, j: usize, sample: usize) -> f64 {
        self.doppler_hz[i][sample] - self.doppler_hz[j][sample]
    }

    pub fn max_abs_differential_hz(&self) -> f64 {
        self.differential_hz
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_common_hz(&self) -> f64 {
        self.common_hz.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest slant-range difference (km) between any UE and the reference.
    pub fn max_range_difference_km(&self) -> f64 {
        (0..self.len())
            .map(|k| self.range_difference_km(k))
            .fold(0.0, f64::max)
    }

    fn range_difference_km(&self, sample: usize) -> f64 {
        let d0 = self.slant_range_km[0][sample];
        self.slant_range_km
            .iter()
            .map(|d| (d[sample] - d0).abs())
            .fold(0.0, f64::max)
    }

    /// Fraction of pass samples where every UE's slant range lies within
    /// `limit_km` of the reference UE's.
    pub fn fraction_within_range_difference(&self, limit_km: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let inside = (0..self.len())
            .filter(|&k| self.range_difference_km(k) <= limit_km)
            .count();
        inside as f64 / self.len() as f64
    }

    /// CSV with columns `t_s,ue_index,elevation_deg,doppler_hz,diff_doppler_hz`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_s,ue_index,elevation_deg,doppler_hz,diff_doppler_hz")?;
        for (k, t) in self.time_s.iter().enumerate() {
            for ue in 0..self.n_ues() {
                writeln!(
                    w,
                    "{:.3},{},{:.6},{:.6},{:.6}",
                    t,
                    ue,
                    self.elevation_deg[ue][k],
                    self.doppler_hz[ue][k],
                    self.differential_hz[ue][k]
                )?;
            }
        }
        Ok(())
    }
}

/// Doppler over a pass without the two-UE requirement.
pub fn doppler_series_with(c: &PhysicalConstants, pass: &PassGeometry) -> Result<DopplerSeries> {
    pass.validate()?;
    let time_s = pass.sample_times(c);
    let n_ues = pass.ue_track_offsets_km.len();
    let n = time_s.len();
    let mut elevation_deg = vec![Vec::with_capacity(n); n_ues];
    let mut slant_range_km = vec![Vec::with_capacity(n); n_ues];
    let mut doppler_hz = vec![Vec::with_capacity(n); n_ues];
    for &t in &time_s {
        for (ue, gamma) in pass.central_angles(c, t).enumerate() {
            let el = elevation_at_central_angle(c, pass.h_sat_km, gamma);
            let f = if gamma == 0.0 {
                0.0
            } else {
                doppler_shift_with(c, pass.carrier_hz, pass.h_sat_km, el, gamma < 0.0)
            };
            elevation_deg[ue].push(el);
            slant_range_km[ue].push(slant_range_at_central_angle(c, pass.h_sat_km, gamma));
            doppler_hz[ue].push(f);
        }
    }
    let common_hz = doppler_hz[0].clone();
    let differential_hz = doppler_hz
        .iter()
        .map(|d| d.iter().zip(&common_hz).map(|(f, f0)| f - f0).collect())
        .collect();
    Ok(DopplerSeries {
        time_s,
        elevation_deg,
        slant_range_km,
        doppler_hz,
        common_hz,
        differential_hz,
    })
}

/// Doppler series with differential parts; needs at least two UEs.
pub fn differential_doppler(pass: &PassGeometry) -> Result<DopplerSeries> {
    differential_doppler_with(&PhysicalConstants::DEFAULT, pass)
}

pub fn differential_doppler_with(
    c: &PhysicalConstants,
    pass: &PassGeometry,
) -> Result<DopplerSeries> {
    if pass.ue_track_offsets_km.len() < 2 {
        return Err(Error::validation(
            "ue_track_offsets_km",
            "differential Doppler needs at least two UEs",
        ));
    }
    doppler_series_with(c, pass)
}

/// Maximum |differential Doppler| (Hz) over the visible pass for two UEs
/// `separation_km` apart on the ground track.
pub fn max_differential_doppler(separation_km: f64, h_sat_km: f64, carrier_hz: f64) -> Result<f64> {
    max_differential_doppler_with(
        &PhysicalConstants::DEFAULT,
        separation_km,
        h_sat_km,
        carrier_hz,
    )
}

pub fn max_differential_doppler_with(
    c: &PhysicalConstants,
    separation_km: f64,
    h_sat_km: f64,
    carrier_hz: f64,
) -> Result<f64> {
    let pass = PassGeometry::pair(h_sat_km, separation_km, carrier_hz);
    Ok(differential_doppler_with(c, &pass)?.max_abs_differential_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zenith_is_altitude() {
        for h in [200.0, 600.0, 1500.0, 35_786.0, 40_000.0] {
            assert_eq!(slant_range(h, 90.0).unwrap(), h);
        }
    }

    #[test]
    fn slant_range_domain() {
        assert!(slant_range(0.0, 10.0).is_err());
        assert!(slant_range(600.0, -1.0).is_err());
        assert!(slant_range(600.0, 90.1).is_err());
        assert!(slant_range(600.0, 0.0).unwrap() > slant_range(600.0, 1.0).unwrap());
    }

    #[test]
    fn delay_of_zero_range() {
        assert_eq!(one_way_delay(0.0), 0.0);
    }

    #[test]
    fn angular_velocity_spot_values() {
        assert_relative_eq!(
            orbital_angular_velocity(600.0),
            1.083e-3,
            max_relative = 1e-3
        );
        let geo = orbital_angular_velocity(35_786.0);
        assert_relative_eq!(geo, 7.29e-5, max_relative = 1e-3);
        let period_h = 2.0 * std::f64::consts::PI / geo / 3600.0;
        assert!((period_h - 23.93).abs() < 0.05, "{period_h}");
        assert!(orbital_angular_velocity(600.0) > orbital_angular_velocity(1500.0));
    }

    #[test]
    fn doppler_at_zenith_is_zero() {
        assert_eq!(doppler_shift(2.2e9, 600.0, 90.0, true), 0.0);
    }

    #[test]
    fn doppler_horizon_value_and_linearity() {
        let f = doppler_shift(2.2e9, 600.0, 0.0, true);
        assert!((f - 50_676.0).abs() < 100.0, "{f}");
        assert_relative_eq!(
            doppler_shift(4.4e9, 600.0, 30.0, true),
            2.0 * doppler_shift(2.2e9, 600.0, 30.0, true)
        );
        assert_eq!(
            doppler_shift(2.2e9, 600.0, 30.0, false),
            -doppler_shift(2.2e9, 600.0, 30.0, true)
        );
    }

    #[test]
    fn mobility_doppler_values() {
        assert!((mobility_doppler(500.0, 20e9) - 9_259.26).abs() < 0.1);
        assert!((mobility_doppler(500.0, 4e9) - 1_851.85).abs() < 0.1);
        assert_eq!(mobility_doppler(0.0, 4e9), 0.0);
    }

    #[test]
    fn elevation_series_epoch() {
        let pass = PassGeometry::pair(600.0, 100.0, 2.2e9);
        let s = elevation_series(&pass).unwrap();
        let mid = s.time_s.len() / 2;
        assert_eq!(s.time_s[mid], 0.0);
        assert_eq!(s.elevation_deg[0][mid], 90.0);
        assert!(s.elevation_deg[0].iter().all(|&e| e >= 10.0 - 1e-9));
    }

    #[test]
    fn unreachable_min_elevation_gives_empty_series() {
        let pass = PassGeometry::pair(600.0, 10.0, 2.2e9).with_min_elevation(91.0);
        assert!(elevation_series(&pass).unwrap().time_s.is_empty());
    }

    #[test]
    fn differential_needs_two_ues() {
        let pass = PassGeometry::new(600.0, vec![0.0], 2.2e9);
        assert!(differential_doppler(&pass).is_err());
    }

    #[test]
    fn zero_separation_has_no_differential() {
        let s = differential_doppler(&PassGeometry::pair(600.0, 0.0, 2.2e9)).unwrap();
        assert!(s.differential_hz[1].iter().all(|&d| d == 0.0));
        assert_eq!(max_differential_doppler(0.0, 600.0, 2.2e9).unwrap(), 0.0);
    }

    #[test]
    fn doppler_bounded_by_horizon_value() {
        let s = differential_doppler(&PassGeometry::pair(600.0, 200.0, 2.2e9)).unwrap();
        let bound = doppler_shift(2.2e9, 600.0, 0.0, true);
        assert!(s.doppler_hz.iter().flatten().all(|f| f.abs() <= bound));
    }

    #[test]
    fn csv_layout() {
        let pass = PassGeometry::pair(600.0, 40.0, 2.2e9).with_time_step(100.0);
        let s = differential_doppler(&pass).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t_s,ue_index,elevation_deg,doppler_hz,diff_doppler_hz"
        );
        assert_eq!(lines.count(), 2 * s.len());
    }
}
