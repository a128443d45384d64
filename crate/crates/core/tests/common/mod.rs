//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the geometry module: positions are propagated in
//! a planar Earth-centred frame and Doppler comes from numerically
//! differentiated ranges.

#![allow(dead_code)]

pub const R_E_KM: f64 = 6378.0;
pub const C: f64 = 3.0e8;
const GM: f64 = 6.67e-11 * 5.98e24;

pub fn omega(h_km: f64) -> f64 {
    let a = (R_E_KM + h_km) * 1e3;
    (GM / (a * a * a)).sqrt()
}

fn sat_pos(h_km: f64, t: f64) -> [f64; 3] {
    let a = (R_E_KM + h_km) * 1e3;
    let g = omega(h_km) * t;
    [a * g.cos(), a * g.sin(), 0.0]
}

fn ue_pos(offset_km: f64) -> [f64; 3] {
    let g = offset_km / R_E_KM;
    let r = R_E_KM * 1e3;
    [r * g.cos(), r * g.sin(), 0.0]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Range (m) from the UE at `offset_km` along the track to the satellite at time `t`.
pub fn range_m(h_km: f64, offset_km: f64, t: f64) -> f64 {
    norm(sub(sat_pos(h_km, t), ue_pos(offset_km)))
}

pub fn elevation_deg(h_km: f64, offset_km: f64, t: f64) -> f64 {
    let u = ue_pos(offset_km);
    let los = sub(sat_pos(h_km, t), u);
    let up = norm(u);
    let dot = (los[0] * u[0] + los[1] * u[1] + los[2] * u[2]) / up;
    (dot / norm(los)).asin().to_degrees()
}

/// Doppler (Hz) from the central-difference range rate; positive while approaching.
pub fn doppler_fd(h_km: f64, offset_km: f64, t: f64, carrier_hz: f64) -> f64 {
    let dt = 1e-3;
    let rate = (range_m(h_km, offset_km, t + dt) - range_m(h_km, offset_km, t - dt)) / (2.0 * dt);
    -carrier_hz * rate / C
}

/// Brute-force max |Δf_d| between UEs at 0 and `separation_km`, scanning the
/// reference UE's visibility window above `min_el_deg` at step `dt`.
pub fn brute_max_differential(
    h_km: f64,
    separation_km: f64,
    carrier_hz: f64,
    min_el_deg: f64,
    dt: f64,
) -> f64 {
    // Satellite is overhead the reference UE at t = 0; the window is symmetric.
    let mut t_edge = 0.0;
    while elevation_deg(h_km, 0.0, t_edge) >= min_el_deg {
        t_edge += 1.0;
    }
    let mut best = 0.0_f64;
    let mut t = -t_edge;
    while t <= t_edge {
        if elevation_deg(h_km, 0.0, t) >= min_el_deg {
            let d = doppler_fd(h_km, separation_km, t, carrier_hz)
                - doppler_fd(h_km, 0.0, t, carrier_hz);
            best = best.max(d.abs());
        }
        t += dt;
    }
    best
}

/// Visibility window (s) above `min_el_deg` located by bisection on the elevation.
pub fn visibility_window_s(h_km: f64, min_el_deg: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while elevation_deg(h_km, 0.0, hi) >= min_el_deg {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if elevation_deg(h_km, 0.0, mid) >= min_el_deg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * lo
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
