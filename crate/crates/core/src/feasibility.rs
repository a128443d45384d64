//! Static PASS/FAIL analysis of MAC timers and frequency budgets against a
//! scenario's delays and Doppler.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{
    differential_doppler_with, round_trip_time_with, DopplerSeries, PassGeometry,
};
use crate::mac_sim::{DelayChannel, HarqConfig};
use crate::numerology::{
    differential_delay_limit_with, harq_dimension, ta_time, NBIOT_MAX_TA_S, NR_MAX_HARQ_PROCESSES,
    NR_MAX_TA_COMMAND,
};
use crate::scenario::{PhysicalConstants, ScenarioConfig, Service};

pub const RA_RAR_WINDOW: &str = "ra_rar_window";
pub const RA_CONTENTION_RESOLUTION: &str = "ra_contention_resolution";
pub const TA_ALIGNMENT_TIMER: &str = "ta_alignment_timer";
pub const TA_DIFFERENTIAL_DELAY: &str = "ta_differential_delay";
pub const HARQ_PROCESSES: &str = "harq_processes";
pub const FREQ_DIFFERENTIAL_DOPPLER: &str = "freq_differential_doppler";
pub const FREQ_COMMON_DOPPLER: &str = "freq_common_doppler";
pub const FREQ_RESIDUAL_OFFSET: &str = "freq_residual_offset";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: &'static str,
}

impl Quantity {
    pub fn new(value: f64, unit: &'static str) -> Self {
        Quantity { value, unit }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Remedy {
    pub text: String,
    /// Amount by which the constraint must grow, in the constraint's unit.
    pub extension: Option<Quantity>,
}

/// One check. `value` is the scenario's demand and `constraint` the limit it
/// must stay under.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub constraint: Quantity,
    pub value: Quantity,
    pub verdict: Verdict,
    pub remedy: Option<Remedy>,
}

impl CheckResult {
    fn pass(name: &'static str, constraint: Quantity, value: Quantity) -> Self {
        CheckResult {
            name,
            constraint,
            value,
            verdict: Verdict::Pass,
            remedy: None,
        }
    }

    fn with_note(mut self, text: impl Into<String>) -> Self {
        self.remedy = Some(Remedy {
            text: text.into(),
            extension: None,
        });
        self
    }

    /// FAIL whose extension is the deficit `value - constraint`.
    fn fail(
        name: &'static str,
        constraint: Quantity,
        value: Quantity,
        text: impl Into<String>,
    ) -> Self {
        let deficit = (value.value - constraint.value).max(0.0);
        CheckResult {
            name,
            constraint,
            value,
            verdict: Verdict::Fail,
            remedy: Some(Remedy {
                text: text.into(),
                extension: Some(Quantity::new(deficit, constraint.unit)),
            }),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub scenario: String,
    pub architecture: String,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl FeasibilityReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub constants: PhysicalConstants,
    pub max_ue_separation_km: f64,
    /// Per-leg processing allowance for HARQ dimensioning.
    pub harq_processing_ms: f64,
    pub harq_process_cap: u32,
    pub nbiot_harq_processes: u32,
    pub nbiot_bundle_repetitions: u32,
    pub doppler_limit_hz: f64,
    pub cfo_search_hz: f64,
    pub min_subcarrier_spacing_hz: f64,
    /// Extra msg3/msg4 delay to the core network for relay architectures.
    pub core_delay_ms: f64,
    /// Pass sampling step; `None` picks min(10 ms, pass/5000).
    pub pass_time_step_s: Option<f64>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            constants: PhysicalConstants::DEFAULT,
            max_ue_separation_km: 200.0,
            harq_processing_ms: 3.0,
            harq_process_cap: NR_MAX_HARQ_PROCESSES,
            nbiot_harq_processes: 1,
            nbiot_bundle_repetitions: 8,
            doppler_limit_hz: 950.0,
            cfo_search_hz: 7_500.0,
            min_subcarrier_spacing_hz: 3_750.0,
            core_delay_ms: 0.0,
            pass_time_step_s: None,
        }
    }
}

impl ReportOptions {
    pub fn with_separation(mut self, km: f64) -> Self {
        self.max_ue_separation_km = km;
        self
    }
}

/// Residual carrier offset after pre-compensating by the negated estimate.
pub fn frequency_advance_residual(true_offset_hz: f64, estimated_offset_hz: f64) -> f64 {
    (true_offset_hz - estimated_offset_hz).abs()
}

fn response_time_ms(c: &PhysicalConstants, scenario: &ScenarioConfig) -> Result<f64> {
    Ok(round_trip_time_with(c, scenario)?.rtt_ms)
}

fn core_delay_ms(scenario: &ScenarioConfig, opts: &ReportOptions) -> f64 {
    if scenario.architecture.uses_relay_nodes() {
        opts.core_delay_ms
    } else {
        0.0
    }
}

/// RAR window and contention resolution timer against the terminating node's round trip.
pub fn check_ra_timers(
    scenario: &ScenarioConfig,
    opts: &ReportOptions,
) -> Result<Vec<CheckResult>> {
    let rtt = response_time_ms(&opts.constants, scenario)?;
    let timers = &scenario.timers;
    let window = Quantity::new(timers.rar_window_ms, "ms");
    let demand = Quantity::new(rtt, "ms");
    let rar = if rtt < timers.rar_window_ms {
        CheckResult::pass(RA_RAR_WINDOW, window, demand)
    } else {
        CheckResult::fail(
            RA_RAR_WINDOW,
            window,
            demand,
            format!("extend the RAR window beyond {rtt:.2} ms, or initialise relay nodes ad hoc at deployment"),
        )
    };
    let cr_demand = Quantity::new(rtt + core_delay_ms(scenario, opts), "ms");
    let cr_timer = Quantity::new(timers.contention_resolution_ms, "ms");
    let cr = if cr_demand.value < timers.contention_resolution_ms {
        CheckResult::pass(RA_CONTENTION_RESOLUTION, cr_timer, cr_demand)
    } else {
        CheckResult::fail(
            RA_CONTENTION_RESOLUTION,
            cr_timer,
            cr_demand,
            format!(
                "extend the contention resolution timer beyond {:.2} ms",
                cr_demand.value
            ),
        )
    };
    Ok(vec![rar, cr])
}

fn pass_series(
    scenario: &ScenarioConfig,
    separation_km: f64,
    opts: &ReportOptions,
) -> Result<DopplerSeries> {
    let c = &opts.constants;
    let mut pass = PassGeometry::pair(scenario.h_sat_km, separation_km, scenario.max_carrier_hz())
        .with_min_elevation(scenario.min_elevation_rx_deg);
    let step = opts.pass_time_step_s.unwrap_or_else(|| {
        (pass.visibility_duration_s(c) / 5000.0).min(PassGeometry::DEFAULT_TIME_STEP_S)
    });
    pass = pass.with_time_step(step);
    differential_doppler_with(c, &pass)
}

fn max_ta_s(scenario: &ScenarioConfig) -> Result<f64> {
    match scenario.service {
        Service::Embb => ta_time(NR_MAX_TA_COMMAND, scenario.mu),
        Service::NbIot => Ok(NBIOT_MAX_TA_S),
    }
}

/// Alignment timer against the round trip, and the largest slant-range
/// difference between UEs `separation_km` apart against the TA budget.
pub fn check_ta(
    scenario: &ScenarioConfig,
    separation_km: f64,
    opts: &ReportOptions,
) -> Result<Vec<CheckResult>> {
    let c = &opts.constants;
    let rtt = response_time_ms(c, scenario)?;
    let timer_ms = scenario.timers.time_alignment_timer_s * 1e3;
    let timer = if rtt <= timer_ms {
        CheckResult::pass(
            TA_ALIGNMENT_TIMER,
            Quantity::new(timer_ms, "ms"),
            Quantity::new(rtt, "ms"),
        )
    } else {
        CheckResult::fail(
            TA_ALIGNMENT_TIMER,
            Quantity::new(timer_ms, "ms"),
            Quantity::new(rtt, "ms"),
            "extend timeAlignmentTimer",
        )
    };

    let limit_km = differential_delay_limit_with(c, max_ta_s(scenario)?);
    let series = pass_series(scenario, separation_km, opts)?;
    let worst = series.max_range_difference_km();
    let constraint = Quantity::new(limit_km, "km");
    let value = Quantity::new(worst, "km");
    let differential = if worst <= limit_km {
        CheckResult::pass(TA_DIFFERENTIAL_DELAY, constraint, value)
    } else if scenario.service == Service::Embb {
        CheckResult::pass(TA_DIFFERENTIAL_DELAY, constraint, value)
            .with_note("satisfiable by ad hoc relay node deployment within one TA range")
    } else {
        let fraction = series.fraction_within_range_difference(limit_km);
        if fraction > 0.0 {
            CheckResult::pass(TA_DIFFERENTIAL_DELAY, constraint, value).with_note(format!(
                "schedule uplink inside the aligned time window ({:.1}% of the pass)",
                fraction * 100.0
            ))
        } else {
            CheckResult::fail(
                TA_DIFFERENTIAL_DELAY,
                constraint,
                value,
                "no part of the pass fits the TA budget; reduce the beam footprint",
            )
        }
    };
    Ok(vec![timer, differential])
}

/// Minimum HARQ process count against the standard cap.
pub fn check_harq(scenario: &ScenarioConfig, opts: &ReportOptions) -> Result<Vec<CheckResult>> {
    let c = &opts.constants;
    let rt = round_trip_time_with(c, scenario)?;
    match scenario.service {
        Service::Embb => {
            let tti = 1.0 / f64::from(1u32 << scenario.mu);
            let d = harq_dimension(rt.one_way_ms, opts.harq_processing_ms, tti)?;
            let constraint = Quantity::new(opts.harq_process_cap as f64, "processes");
            let value = Quantity::new(d.n_min as f64, "processes");
            if d.n_min <= opts.harq_process_cap {
                Ok(vec![CheckResult::pass(HARQ_PROCESSES, constraint, value)])
            } else {
                Ok(vec![CheckResult::fail(
                    HARQ_PROCESSES,
                    constraint,
                    value,
                    format!(
                        "{} processes need {}-bit HARQ ids and a soft buffer of {:.0} TTIs; options: \
                         larger soft buffer, 2-bit ACK, fewer processes with reduced throughput, or no HARQ",
                        d.n_min, d.dci_bits, d.buffer_units / tti
                    ),
                )])
            }
        }
        Service::NbIot => {
            let ch = DelayChannel::symmetric(rt.one_way_ms)?;
            let cfg = HarqConfig::nbiot(
                opts.nbiot_harq_processes,
                opts.nbiot_bundle_repetitions,
                false,
                1.0,
            );
            cfg.validate()?;
            let util = cfg.expected_utilization(&ch);
            Ok(vec![CheckResult::pass(
                HARQ_PROCESSES,
                Quantity::new(2.0, "processes"),
                Quantity::new(opts.nbiot_harq_processes as f64, "processes"),
            )
            .with_note(format!(
                "bundled stop-and-wait works unchanged; downlink utilization drops to {:.1}%",
                util * 100.0
            ))])
        }
    }
}

/// Differential Doppler, common Doppler and residual offset checks.
pub fn check_frequency(
    scenario: &ScenarioConfig,
    separation_km: f64,
    opts: &ReportOptions,
) -> Result<Vec<CheckResult>> {
    let diff_limit = Quantity::new(opts.doppler_limit_hz, "Hz");
    let cfo = Quantity::new(opts.cfo_search_hz, "Hz");
    let scs = Quantity::new(opts.min_subcarrier_spacing_hz, "Hz");
    if scenario.service == Service::Embb {
        let note = "Doppler negligible: fixed relay nodes served by a GEO satellite";
        let zero = Quantity::new(0.0, "Hz");
        return Ok(vec![
            CheckResult::pass(FREQ_DIFFERENTIAL_DOPPLER, diff_limit, zero).with_note(note),
            CheckResult::pass(FREQ_COMMON_DOPPLER, cfo, zero).with_note(note),
            CheckResult::pass(FREQ_RESIDUAL_OFFSET, scs, zero).with_note(note),
        ]);
    }
    let series = pass_series(scenario, separation_km, opts)?;
    let diff = series.max_abs_differential_hz();
    let common = series.max_abs_common_hz();
    let diff_value = Quantity::new(diff, "Hz");

    let differential = if diff <= opts.doppler_limit_hz {
        CheckResult::pass(FREQ_DIFFERENTIAL_DOPPLER, diff_limit, diff_value)
    } else {
        CheckResult::fail(
            FREQ_DIFFERENTIAL_DOPPLER,
            diff_limit,
            diff_value,
            "pre-compensate each UE's Doppler (frequency advance from the downlink estimate)",
        )
    };
    let common_value = Quantity::new(common, "Hz");
    let common_check = if common <= opts.cfo_search_hz {
        CheckResult::pass(FREQ_COMMON_DOPPLER, cfo, common_value)
    } else {
        CheckResult::fail(
            FREQ_COMMON_DOPPLER,
            cfo,
            common_value,
            "GNSS-based Doppler compensation at the UE",
        )
    };
    // After the eNB removes the common part, the differential part is what
    // remains between neighbouring subcarriers.
    let residual = frequency_advance_residual(diff, 0.0);
    let residual_value = Quantity::new(residual, "Hz");
    let residual_check = if residual < opts.min_subcarrier_spacing_hz {
        CheckResult::pass(FREQ_RESIDUAL_OFFSET, scs, residual_value)
    } else {
        CheckResult::fail(
            FREQ_RESIDUAL_OFFSET,
            scs,
            residual_value,
            "frequency advance per UE before uplink transmission",
        )
    };
    Ok(vec![differential, common_check, residual_check])
}

/// Every check for `scenario`, in a fixed order.
pub fn full_report(scenario: &ScenarioConfig, opts: &ReportOptions) -> Result<FeasibilityReport> {
    scenario.validate()?;
    opts.constants.validate()?;
    let sep = opts.max_ue_separation_km;
    let mut checks = check_ra_timers(scenario, opts)?;
    checks.extend(check_ta(scenario, sep, opts)?);
    checks.extend(check_harq(scenario, opts)?);
    checks.extend(check_frequency(scenario, sep, opts)?);
    let pass = checks.iter().filter(|c| c.passed()).count();
    Ok(FeasibilityReport {
        scenario: scenario.name.clone(),
        architecture: scenario.architecture.to_string(),
        summary: Summary {
            total: checks.len(),
            pass,
            fail: checks.len() - pass,
        },
        checks,
    })
}
