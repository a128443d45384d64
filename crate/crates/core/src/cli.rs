//! Command-line front end.
//!
//! Every subcommand resolves one or more scenarios, expands `--sweep` lists
//! into a cartesian grid of runs and executes the runs in parallel. Run `i`
//! of a stochastic subcommand uses seed `seed + i`, so results do not depend
//! on scheduling. Without `--out` the summary goes to stdout; with it, all
//! artifacts are written atomically next to a `manifest.json` that records
//! the scenarios, the seed and a SHA-256 of each artifact.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::feasibility::{check_ta, full_report, CheckResult, ReportOptions};
use crate::geometry::{differential_doppler_with, path_table, round_trip_time_with, PassGeometry};
use crate::mac_sim::{simulate_harq, simulate_ra, DelayChannel, HarqConfig, RaConfig, RaMode};
use crate::numerology::{
    differential_delay_limit_with, harq_dimension, max_compensable_distance_with,
    nbiot_max_ta_command, nbiot_ta_time, ta_distance_step_with, ta_time, Numerology,
    NBIOT_MAX_TA_S, NR_MAX_TA_COMMAND,
};
use crate::scenario::{
    builtin_scenario, builtin_scenarios, load_scenario, ScenarioConfig, Service, NBIOT_LEO1500,
    NBIOT_LEO600,
};
use crate::waveform::{run_study, write_ccdf_csv, StudyConfig};

/// Overrides where builtin scenarios are loaded from (`<dir>/<name>.json`).
pub const BUILTIN_DIR_ENV: &str = "NTN_LAB_BUILTIN_DIR";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "ntn-lab",
    version,
    about = "Feasibility laboratory for 5G NR over satellite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Builtin scenario name or path to a scenario JSON file. Defaults to every builtin.
    #[arg(long)]
    scenario: Option<String>,
    /// Directory for artifacts and manifest. Summary goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; required by stochastic subcommands.
    #[arg(long)]
    seed: Option<u64>,
    /// Parameter list to sweep, e.g. `separation=40,200`. Repeatable.
    #[arg(long, value_name = "KEY=V1,V2,...")]
    sweep: Vec<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Slant ranges and delays of every path, and the procedure round trip.
    Geometry {
        #[command(flatten)]
        common: Common,
    },
    /// Common and differential Doppler over a satellite pass.
    Doppler {
        #[command(flatten)]
        common: Common,
        /// Ground-track separation of the two UEs (km).
        #[arg(long, default_value_t = 200.0)]
        separation: f64,
        /// Pass sampling step (s).
        #[arg(long, default_value_t = 0.1)]
        time_step: f64,
    },
    /// Timing advance quantization and alignment checks.
    Ta {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200.0)]
        separation: f64,
    },
    /// HARQ process dimensioning.
    Harq {
        #[command(flatten)]
        common: Common,
        /// Per-leg processing allowance (ms).
        #[arg(long, default_value_t = 3.0)]
        processing: f64,
    },
    /// Full feasibility report.
    Feasibility {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200.0)]
        separation: f64,
    },
    /// Discrete-event random access simulation.
    SimulateRa {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        ues: usize,
        /// Per-message loss probability.
        #[arg(long, default_value_t = 0.0)]
        loss: f64,
        #[arg(long)]
        contention_free: bool,
    },
    /// Discrete-event HARQ simulation.
    SimulateHarq {
        #[command(flatten)]
        common: Common,
        /// Parallel processes; 16 for NR and 1 for NB-IoT when absent.
        #[arg(long)]
        processes: Option<u32>,
        #[arg(long, default_value_t = 10_000.0)]
        duration_ms: f64,
        #[arg(long, default_value_t = 0.0)]
        loss: f64,
    },
    /// OFDM vs f-OFDM spectra and PAPR, linear and through the TWTA.
    Waveform {
        #[command(flatten)]
        common: Common,
        /// Input back-off (dB).
        #[arg(long, default_value_t = 20.0)]
        ibo: f64,
        #[arg(long, default_value_t = 200)]
        symbols: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Geometry { .. } => "geometry",
            Command::Doppler { .. } => "doppler",
            Command::Ta { .. } => "ta",
            Command::Harq { .. } => "harq",
            Command::Feasibility { .. } => "feasibility",
            Command::SimulateRa { .. } => "simulate-ra",
            Command::SimulateHarq { .. } => "simulate-harq",
            Command::Waveform { .. } => "waveform",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Geometry { common }
            | Command::Doppler { common, .. }
            | Command::Ta { common, .. }
            | Command::Harq { common, .. }
            | Command::Feasibility { common, .. }
            | Command::SimulateRa { common, .. }
            | Command::SimulateHarq { common, .. }
            | Command::Waveform { common, .. } => common,
        }
    }

    fn is_stochastic(&self) -> bool {
        matches!(
            self,
            Command::SimulateRa { .. } | Command::SimulateHarq { .. } | Command::Waveform { .. }
        )
    }

    fn uses_scenario(&self) -> bool {
        !matches!(self, Command::Waveform { .. })
    }

    fn sweep_keys(&self) -> &'static [&'static str] {
        match self {
            Command::Geometry { .. } => &["altitude", "elevation"],
            Command::Doppler { .. } => &["altitude", "separation"],
            Command::Ta { .. } => &["mu", "separation"],
            Command::Harq { .. } => &["tti", "processing"],
            Command::Feasibility { .. } => &["separation"],
            Command::SimulateRa { .. } => &["ues", "loss"],
            Command::SimulateHarq { .. } => &["processes", "loss"],
            Command::Waveform { .. } => &["ibo", "symbols"],
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Feasibility { .. } => Format::Json,
            _ => Format::Csv,
        }
    }

    fn default_scenarios(&self) -> &'static [&'static str] {
        match self {
            // A pass model only makes sense for non-geostationary orbits.
            Command::Doppler { .. } => &[NBIOT_LEO600, NBIOT_LEO1500],
            _ => &[],
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand, writing the
/// summary to stdout. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_user_error() {
                2
            } else {
                1
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Run planning

type Params = Vec<(String, String)>;

#[derive(Debug, Clone)]
struct RunSpec {
    scenario: Option<ScenarioConfig>,
    params: Params,
    seed: Option<u64>,
}

impl RunSpec {
    fn label(&self, command: &str) -> String {
        let mut parts: Vec<String> = self.scenario.iter().map(|s| s.name.clone()).collect();
        parts.extend(self.params.iter().map(|(k, v)| format!("{k}{v}")));
        if parts.is_empty() {
            command.to_string()
        } else {
            parts.join("_")
        }
    }

    fn scenario(&self) -> &ScenarioConfig {
        self.scenario.as_ref().expect("scenario-based run")
    }

    fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.param(key).map_or(Ok(default), |v| parse_value(key, v))
    }

    fn int_or<N: std::str::FromStr>(&self, key: &str, default: N) -> Result<N> {
        self.param(key).map_or(Ok(default), |v| parse_value(key, v))
    }
}

fn parse_value<N: std::str::FromStr>(key: &str, v: &str) -> Result<N> {
    v.parse()
        .map_err(|_| Error::validation(key, format!("cannot parse `{v}`")))
}

fn parse_sweeps(specs: &[String], allowed: &[&str]) -> Result<Vec<(String, Vec<String>)>> {
    let mut sweeps: Vec<(String, Vec<String>)> = Vec::new();
    for spec in specs {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::validation("sweep", format!("`{spec}` is not KEY=V1,V2,...")))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(Error::validation(
                "sweep",
                format!(
                    "unknown key `{key}`; expected one of {}",
                    allowed.join(", ")
                ),
            ));
        }
        if sweeps.iter().any(|(k, _)| k == key) {
            return Err(Error::validation(
                "sweep",
                format!("key `{key}` given twice"),
            ));
        }
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::validation("sweep", format!("no values for `{key}`")));
        }
        sweeps.push((key.to_string(), values));
    }
    Ok(sweeps)
}

/// Cartesian product, first key varying slowest.
fn grid(sweeps: &[(String, Vec<String>)]) -> Vec<Params> {
    sweeps.iter().fold(vec![Vec::new()], |acc, (k, vs)| {
        acc.iter()
            .flat_map(|p| {
                vs.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((k.clone(), v.clone()));
                    q
                })
            })
            .collect()
    })
}

fn resolve_scenario(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    if arg.ends_with(".json") || arg.contains(std::path::MAIN_SEPARATOR) || path.is_file() {
        return load_scenario(path);
    }
    if let Some(dir) = std::env::var_os(BUILTIN_DIR_ENV) {
        let file = Path::new(&dir).join(format!("{arg}.json"));
        if !file.is_file() {
            return Err(Error::Config(format!(
                "scenario `{arg}` not found in {}",
                Path::new(&dir).display()
            )));
        }
        return load_scenario(file);
    }
    builtin_scenario(arg).ok_or_else(|| {
        let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
        Error::validation(
            "scenario",
            format!(
                "unknown scenario `{arg}`; builtins are {}",
                names.join(", ")
            ),
        )
    })
}

fn scenarios_for(command: &Command) -> Result<Vec<ScenarioConfig>> {
    if !command.uses_scenario() {
        return Ok(Vec::new());
    }
    if let Some(arg) = &command.common().scenario {
        return Ok(vec![resolve_scenario(arg)?]);
    }
    let names: Vec<String> = match command.default_scenarios() {
        [] => builtin_scenarios().into_iter().map(|s| s.name).collect(),
        names => names.iter().map(|s| s.to_string()).collect(),
    };
    names.iter().map(|n| resolve_scenario(n)).collect()
}

fn plan(command: &Command) -> Result<Vec<RunSpec>> {
    let common = command.common();
    let seed = match (command.is_stochastic(), common.seed) {
        (true, None) => {
            return Err(Error::validation(
                "seed",
                format!("`{}` is stochastic and needs --seed", command.name()),
            ))
        }
        (_, s) => s,
    };
    let points = grid(&parse_sweeps(&common.sweep, command.sweep_keys())?);
    let scenarios: Vec<Option<ScenarioConfig>> = if command.uses_scenario() {
        scenarios_for(command)?.into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let mut runs = Vec::new();
    for scenario in &scenarios {
        for params in &points {
            let index = runs.len() as u64;
            runs.push(RunSpec {
                scenario: scenario.clone(),
                params: params.clone(),
                seed: seed.map(|s| s.wrapping_add(index)),
            });
        }
    }
    Ok(runs)
}

// ---------------------------------------------------------------------------
// Run outputs

#[derive(Debug, Clone, Default)]
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }
}

struct RunOutput {
    tables: Vec<(&'static str, Table)>,
    json: Value,
    /// Per-run plot data and logs, by file suffix.
    files: Vec<(&'static str, Vec<u8>)>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

fn execute_run(command: &Command, run: &RunSpec) -> Result<RunOutput> {
    match command {
        Command::Geometry { .. } => run_geometry(run),
        Command::Doppler {
            separation,
            time_step,
            ..
        } => run_doppler(run, *separation, *time_step),
        Command::Ta { separation, .. } => run_ta(run, *separation),
        Command::Harq { processing, .. } => run_harq(run, *processing),
        Command::Feasibility { separation, .. } => run_feasibility(run, *separation),
        Command::SimulateRa {
            ues,
            loss,
            contention_free,
            ..
        } => run_simulate_ra(run, *ues, *loss, *contention_free),
        Command::SimulateHarq {
            processes,
            duration_ms,
            loss,
            ..
        } => run_simulate_harq(run, *processes, *duration_ms, *loss),
        Command::Waveform { ibo, symbols, .. } => run_waveform(run, *ibo, *symbols),
    }
}

fn run_geometry(run: &RunSpec) -> Result<RunOutput> {
    let mut s = run.scenario().clone();
    s.h_sat_km = run.f64_or("altitude", s.h_sat_km)?;
    s.min_elevation_rx_deg = run.f64_or("elevation", s.min_elevation_rx_deg)?;
    s.validate()?;
    let c = crate::scenario::PhysicalConstants::DEFAULT;
    let [service, feeder] = path_table(&c, &s)?;
    let rt = round_trip_time_with(&c, &s)?;

    let mut paths = Table::new(&[
        "path",
        "h_sat_km",
        "elevation_deg",
        "slant_range_km",
        "one_way_delay_ms",
    ]);
    for (name, p) in [("service", service), ("feeder", feeder)] {
        paths.row(vec![
            name.into(),
            num(p.h_sat_km),
            num(p.elevation_deg),
            num(p.slant_range_km),
            num(p.one_way_delay_ms),
        ]);
    }
    let mut delays = Table::new(&["architecture", "one_way_ms", "rtt_ms"]);
    delays.row(vec![
        s.architecture.to_string(),
        num(rt.one_way_ms),
        num(rt.rtt_ms),
    ]);

    let path_json = |p: &crate::geometry::LinkGeometry| {
        json!({
            "h_sat_km": p.h_sat_km,
            "elevation_deg": p.elevation_deg,
            "slant_range_km": p.slant_range_km,
            "one_way_delay_ms": p.one_way_delay_ms,
        })
    };
    Ok(RunOutput {
        json: json!({
            "service": path_json(&service),
            "feeder": path_json(&feeder),
            "architecture": s.architecture.to_string(),
            "one_way_ms": rt.one_way_ms,
            "rtt_ms": rt.rtt_ms,
        }),
        tables: vec![("paths", paths), ("delays", delays)],
        files: Vec::new(),
    })
}

fn run_doppler(run: &RunSpec, separation: f64, time_step: f64) -> Result<RunOutput> {
    let s = run.scenario();
    let h = run.f64_or("altitude", s.h_sat_km)?;
    let sep = run.f64_or("separation", separation)?;
    let c = crate::scenario::PhysicalConstants::DEFAULT;
    let pass = PassGeometry::pair(h, sep, s.carrier_dl_hz)
        .with_min_elevation(s.min_elevation_rx_deg)
        .with_time_step(time_step);
    let series = differential_doppler_with(&c, &pass)?;
    let visibility = pass.visibility_duration_s(&c);
    let ta_limit_km = differential_delay_limit_with(&c, NBIOT_MAX_TA_S);
    let within = series.fraction_within_range_difference(ta_limit_km);

    let mut t = Table::new(&[
        "h_sat_km",
        "separation_km",
        "carrier_hz",
        "visibility_s",
        "max_common_doppler_hz",
        "max_differential_doppler_hz",
        "max_range_difference_km",
        "fraction_within_ta_budget",
    ]);
    t.row(vec![
        num(h),
        num(sep),
        num(s.carrier_dl_hz),
        num(visibility),
        num(series.max_abs_common_hz()),
        num(series.max_abs_differential_hz()),
        num(series.max_range_difference_km()),
        num(within),
    ]);
    Ok(RunOutput {
        json: json!({
            "h_sat_km": h,
            "separation_km": sep,
            "carrier_hz": s.carrier_dl_hz,
            "visibility_s": visibility,
            "max_common_doppler_hz": series.max_abs_common_hz(),
            "max_differential_doppler_hz": series.max_abs_differential_hz(),
            "max_range_difference_km": series.max_range_difference_km(),
            "fraction_within_ta_budget": within,
        }),
        tables: vec![("doppler", t)],
        files: vec![("series.csv", to_bytes(|w| series.write_csv(w)))],
    })
}

fn checks_table(checks: &[CheckResult]) -> Table {
    let mut t = Table::new(&[
        "check",
        "verdict",
        "value",
        "value_unit",
        "constraint",
        "constraint_unit",
        "remedy",
    ]);
    for c in checks {
        t.row(vec![
            c.name.into(),
            if c.passed() { "PASS" } else { "FAIL" }.into(),
            num(c.value.value),
            c.value.unit.into(),
            num(c.constraint.value),
            c.constraint.unit.into(),
            c.remedy
                .as_ref()
                .map(|r| r.text.clone())
                .unwrap_or_default(),
        ]);
    }
    t
}

fn run_ta(run: &RunSpec, separation: f64) -> Result<RunOutput> {
    let s = run.scenario();
    let sep = run.f64_or("separation", separation)?;
    let c = crate::scenario::PhysicalConstants::DEFAULT;
    let mut t = Table::new(&[
        "system",
        "mu",
        "max_command",
        "step_s",
        "distance_step_m",
        "max_ta_s",
        "max_compensable_km",
    ]);
    let row = match s.service {
        Service::Embb => {
            let mu: u8 = run.int_or("mu", s.mu)?;
            Numerology::new(mu)?;
            let step = ta_time(1, mu)?;
            vec![
                "nr".to_string(),
                mu.to_string(),
                NR_MAX_TA_COMMAND.to_string(),
                num(step),
                num(ta_distance_step_with(&c, mu)?),
                num(ta_time(NR_MAX_TA_COMMAND, mu)?),
                num(max_compensable_distance_with(&c, mu)?),
            ]
        }
        Service::NbIot => {
            if run.param("mu").is_some() {
                return Err(Error::Config(
                    "NB-IoT has a single numerology; drop the `mu` sweep".into(),
                ));
            }
            let step = nbiot_ta_time(1)?;
            let max = nbiot_ta_time(nbiot_max_ta_command())?;
            vec![
                "nbiot".to_string(),
                "-".to_string(),
                nbiot_max_ta_command().to_string(),
                num(step),
                num(c.speed_of_light * step / 2.0),
                num(max),
                num(differential_delay_limit_with(&c, max)),
            ]
        }
    };
    let json_quant: Map<String, Value> = t
        .header
        .iter()
        .zip(&row)
        .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
        .collect();
    t.row(row);
    let opts = ReportOptions::default().with_separation(sep);
    let checks = check_ta(s, sep, &opts)?;
    Ok(RunOutput {
        json: json!({ "quantization": json_quant, "checks": checks }),
        tables: vec![("quantization", t), ("checks", checks_table(&checks))],
        files: Vec::new(),
    })
}

fn run_harq(run: &RunSpec, processing: f64) -> Result<RunOutput> {
    let s = run.scenario();
    let default_tti = match s.service {
        Service::Embb => Numerology::new(s.mu)?.tti_ms(),
        Service::NbIot => 1.0,
    };
    let tti = run.f64_or("tti", default_tti)?;
    let t_proc = run.f64_or("processing", processing)?;
    let rt = round_trip_time_with(&crate::scenario::PhysicalConstants::DEFAULT, s)?;
    let d = harq_dimension(rt.one_way_ms, t_proc, tti)?;
    let mut t = Table::new(&[
        "t_owp_ms",
        "t_proc_ms",
        "tti_ms",
        "t_harq_ms",
        "n_min",
        "dci_bits",
        "buffer_units",
    ]);
    t.row(vec![
        num(d.t_owp_ms),
        num(d.t_proc_ms),
        num(d.tti_ms),
        num(d.t_harq_ms),
        d.n_min.to_string(),
        d.dci_bits.to_string(),
        num(d.buffer_units),
    ]);
    Ok(RunOutput {
        json: json!({
            "t_owp_ms": d.t_owp_ms,
            "t_proc_ms": d.t_proc_ms,
            "tti_ms": d.tti_ms,
            "t_harq_ms": d.t_harq_ms,
            "n_min": d.n_min,
            "dci_bits": d.dci_bits,
            "buffer_units": d.buffer_units,
        }),
        tables: vec![("harq", t)],
        files: Vec::new(),
    })
}

fn run_feasibility(run: &RunSpec, separation: f64) -> Result<RunOutput> {
    let sep = run.f64_or("separation", separation)?;
    let report = full_report(
        run.scenario(),
        &ReportOptions::default().with_separation(sep),
    )?;
    Ok(RunOutput {
        json: serde_json::to_value(&report).expect("report serializes"),
        tables: vec![("checks", checks_table(&report.checks))],
        files: Vec::new(),
    })
}

fn run_simulate_ra(
    run: &RunSpec,
    ues: usize,
    loss: f64,
    contention_free: bool,
) -> Result<RunOutput> {
    let s = run.scenario();
    let n: usize = run.int_or("ues", ues)?;
    let loss = run.f64_or("loss", loss)?;
    let seed = run.seed.expect("stochastic run has a seed");
    let channel = DelayChannel::from_scenario(s)?.with_loss(loss)?;
    let mut cfg = RaConfig::new(n);
    if contention_free {
        cfg.mode = RaMode::ContentionFree;
    }
    let report = simulate_ra(s, &channel, &cfg, seed)?;

    let delays: Vec<f64> = report
        .outcomes
        .iter()
        .filter_map(|o| o.access_delay_ms)
        .collect();
    let mean_delay = if delays.is_empty() {
        f64::NAN
    } else {
        delays.iter().sum::<f64>() / delays.len() as f64
    };
    let mut t = Table::new(&[
        "ues",
        "loss",
        "success_rate",
        "connected",
        "mean_access_delay_ms",
    ]);
    t.row(vec![
        n.to_string(),
        num(loss),
        num(report.success_rate()),
        delays.len().to_string(),
        num(mean_delay),
    ]);
    let outcomes = to_bytes(|w| {
        writeln!(w, "ue,success,state,access_delay_ms,attempts,contention_failures,coverage_level,failure_cause")?;
        for o in &report.outcomes {
            writeln!(
                w,
                "{},{},{:?},{},{},{},{},{}",
                o.ue,
                o.success,
                o.state,
                o.access_delay_ms.map(num).unwrap_or_default(),
                o.attempts,
                o.contention_failures,
                o.coverage_level,
                o.failure_cause
                    .map(|c| format!("{c:?}"))
                    .unwrap_or_default(),
            )?;
        }
        Ok(())
    });
    Ok(RunOutput {
        json: json!({
            "ues": n,
            "loss": loss,
            "success_rate": report.success_rate(),
            "mean_access_delay_ms": if delays.is_empty() { Value::Null } else { json!(mean_delay) },
            "outcomes": report.outcomes,
        }),
        tables: vec![("ra", t)],
        files: vec![
            ("outcomes.csv", outcomes),
            ("events.log", report.log.to_text().into_bytes()),
        ],
    })
}

fn run_simulate_harq(
    run: &RunSpec,
    processes: Option<u32>,
    duration_ms: f64,
    loss: f64,
) -> Result<RunOutput> {
    let s = run.scenario();
    let default_n = processes.unwrap_or(match s.service {
        Service::Embb => 16,
        Service::NbIot => 1,
    });
    let n: u32 = run.int_or("processes", default_n)?;
    let loss = run.f64_or("loss", loss)?;
    let seed = run.seed.expect("stochastic run has a seed");
    let channel = DelayChannel::from_scenario(s)?.with_loss(loss)?;
    let cfg = match s.service {
        Service::Embb => HarqConfig::for_scenario(s, n, duration_ms),
        Service::NbIot => HarqConfig::nbiot(n, 8, false, duration_ms),
    };
    let report = simulate_harq(&channel, &cfg, seed)?;
    let st = report.stats;
    let expected = cfg.expected_utilization(&channel);
    let mut t = Table::new(&[
        "processes",
        "loss",
        "cycle_ms",
        "utilization",
        "expected_utilization",
        "throughput_tb_per_s",
        "tbs_acked",
        "tbs_dropped",
        "retransmissions",
    ]);
    t.row(vec![
        n.to_string(),
        num(loss),
        num(st.cycle_ms),
        num(st.utilization),
        num(expected),
        num(st.throughput_tb_per_s),
        st.tbs_acked.to_string(),
        st.tbs_dropped.to_string(),
        st.retransmissions.to_string(),
    ]);
    Ok(RunOutput {
        json: json!({
            "processes": n,
            "loss": loss,
            "expected_utilization": expected,
            "stats": st,
        }),
        tables: vec![("harq", t)],
        files: vec![("events.log", report.log.to_text().into_bytes())],
    })
}

fn run_waveform(run: &RunSpec, ibo: f64, symbols: usize) -> Result<RunOutput> {
    let ibo = run.f64_or("ibo", ibo)?;
    let symbols: usize = run.int_or("symbols", symbols)?;
    let seed = run.seed.expect("stochastic run has a seed");
    let mut cfg = StudyConfig::new(ibo, seed);
    cfg.ofdm = cfg.ofdm.with_symbols(symbols);
    let r = run_study(&cfg)?;

    let mut t = Table::new(&[
        "signal",
        "ibo_db",
        "in_band_db",
        "out_of_band_db",
        "oobe_db",
        "papr_db",
    ]);
    let variants = [
        ("ofdm", &r.ofdm, Some(r.ofdm_papr_db)),
        ("fofdm", &r.fofdm, Some(r.fofdm_papr_db)),
        ("ofdm_twta", &r.ofdm_twta, None),
        ("fofdm_twta", &r.fofdm_twta, None),
    ];
    let mut spectra = Map::new();
    let mut files = Vec::new();
    for (name, est, papr) in variants {
        t.row(vec![
            name.into(),
            num(ibo),
            num(est.in_band_db),
            num(est.out_of_band_db),
            num(est.oobe_suppression_db),
            papr.map(num).unwrap_or_default(),
        ]);
        spectra.insert(
            name.into(),
            json!({
                "in_band_db": est.in_band_db,
                "out_of_band_db": est.out_of_band_db,
                "oobe_db": est.oobe_suppression_db,
            }),
        );
    }
    files.push(("psd_ofdm.csv", to_bytes(|w| r.ofdm.write_csv(w))));
    files.push(("psd_fofdm.csv", to_bytes(|w| r.fofdm.write_csv(w))));
    files.push(("psd_ofdm_twta.csv", to_bytes(|w| r.ofdm_twta.write_csv(w))));
    files.push((
        "psd_fofdm_twta.csv",
        to_bytes(|w| r.fofdm_twta.write_csv(w)),
    ));
    files.push((
        "ccdf_ofdm.csv",
        to_bytes(|w| write_ccdf_csv(&r.ofdm_ccdf, w)),
    ));
    files.push((
        "ccdf_fofdm.csv",
        to_bytes(|w| write_ccdf_csv(&r.fofdm_ccdf, w)),
    ));
    Ok(RunOutput {
        json: json!({
            "ibo_db": ibo,
            "symbols": symbols,
            "spectra": spectra,
            "papr_probability": cfg.papr_probability,
            "ofdm_papr_db": r.ofdm_papr_db,
            "fofdm_papr_db": r.fofdm_papr_db,
            "linear_gap_db": r.linear_gap_db(),
            "twta_gap_db": r.twta_gap_db(),
        }),
        tables: vec![("waveform", t)],
        files,
    })
}

// ---------------------------------------------------------------------------
// Emission

fn execute(command: &Command, out: &mut dyn Write) -> Result<()> {
    let runs = plan(command)?;
    let outputs = runs
        .par_iter()
        .map(|r| execute_run(command, r))
        .collect::<Result<Vec<_>>>()?;
    let common = command.common();
    let format = common.format.unwrap_or_else(|| command.default_format());
    let sweep_keys: Vec<&str> = runs
        .first()
        .map(|r| r.params.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();

    let summaries: Vec<(String, Vec<u8>)> = match format {
        Format::Csv => {
            let tables = combined_tables(command, &runs, &outputs, &sweep_keys);
            let single = tables.len() == 1;
            tables
                .into_iter()
                .map(|(name, bytes)| match single {
                    true => (format!("{}.csv", command.name()), bytes),
                    false => (format!("{}_{name}.csv", command.name()), bytes),
                })
                .collect()
        }
        Format::Json => vec![(
            format!("{}.json", command.name()),
            combined_json(command, &runs, &outputs),
        )],
    };

    let Some(dir) = &common.out else {
        let many = summaries.len() > 1;
        for (name, bytes) in &summaries {
            if many {
                writeln!(out, "# {name}").map_err(|e| Error::io("<stdout>", e))?;
            }
            out.write_all(bytes).map_err(|e| Error::io("<stdout>", e))?;
        }
        return Ok(());
    };

    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut artifacts = Vec::new();
    for (name, bytes) in &summaries {
        write_atomic(dir, name, bytes)?;
        artifacts.push(artifact_entry(name, bytes));
    }
    for (run, output) in runs.iter().zip(&outputs) {
        let label = run.label(command.name());
        for (suffix, bytes) in &output.files {
            let name = format!("{label}_{suffix}");
            write_atomic(dir, &name, bytes)?;
            artifacts.push(artifact_entry(&name, bytes));
        }
    }
    artifacts.sort_by(|a, b| a["path"].as_str().cmp(&b["path"].as_str()));
    let manifest = manifest(command, &runs, artifacts);
    write_atomic(dir, MANIFEST_FILE, &manifest)?;
    writeln!(out, "{}", dir.join(MANIFEST_FILE).display()).map_err(|e| Error::io("<stdout>", e))?;
    Ok(())
}

fn combined_tables(
    command: &Command,
    runs: &[RunSpec],
    outputs: &[RunOutput],
    sweep_keys: &[&str],
) -> Vec<(&'static str, Vec<u8>)> {
    let Some(first) = outputs.first() else {
        return Vec::new();
    };
    let with_scenario = command.uses_scenario();
    let with_seed = command.is_stochastic();
    first
        .tables
        .iter()
        .enumerate()
        .map(|(i, (name, table))| {
            // Sweep keys the table already reports (e.g. `ues`, `separation_km`) are not repeated.
            let shown: Vec<bool> = sweep_keys
                .iter()
                .map(|k| {
                    !table.header.iter().any(|h| {
                        h == k || h.strip_prefix(k).is_some_and(|rest| rest.starts_with('_'))
                    })
                })
                .collect();
            let mut header: Vec<&str> = Vec::new();
            if with_scenario {
                header.push("scenario");
            }
            header.extend(
                sweep_keys
                    .iter()
                    .zip(&shown)
                    .filter(|(_, s)| **s)
                    .map(|(k, _)| *k),
            );
            if with_seed {
                header.push("seed");
            }
            header.extend(table.header.iter().copied());
            let mut text = header.join(",");
            text.push('\n');
            for (run, output) in runs.iter().zip(outputs) {
                let mut prefix: Vec<String> = Vec::new();
                if let Some(s) = &run.scenario {
                    prefix.push(s.name.clone());
                }
                prefix.extend(
                    run.params
                        .iter()
                        .zip(&shown)
                        .filter(|(_, s)| **s)
                        .map(|((_, v), _)| v.clone()),
                );
                if let Some(seed) = run.seed {
                    prefix.push(seed.to_string());
                }
                for row in &output.tables[i].1.rows {
                    let cells: Vec<String> =
                        prefix.iter().chain(row).map(|c| csv_field(c)).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
            }
            (*name, text.into_bytes())
        })
        .collect()
}

fn run_header(run: &RunSpec) -> Map<String, Value> {
    let mut m = Map::new();
    if let Some(s) = &run.scenario {
        m.insert("scenario".into(), json!(s.name));
    }
    let params: Map<String, Value> = run
        .params
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    m.insert("params".into(), Value::Object(params));
    if let Some(seed) = run.seed {
        m.insert("seed".into(), json!(seed));
    }
    m
}

fn combined_json(command: &Command, runs: &[RunSpec], outputs: &[RunOutput]) -> Vec<u8> {
    let runs: Vec<Value> = runs
        .iter()
        .zip(outputs)
        .map(|(run, output)| {
            let mut m = run_header(run);
            m.insert("result".into(), output.json.clone());
            Value::Object(m)
        })
        .collect();
    let doc = json!({ "subcommand": command.name(), "runs": runs });
    let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
    text.push('\n');
    text.into_bytes()
}

fn artifact_entry(name: &str, bytes: &[u8]) -> Value {
    json!({
        "path": name,
        "bytes": bytes.len(),
        "sha256": hex::encode(Sha256::digest(bytes)),
    })
}

fn manifest(command: &Command, runs: &[RunSpec], artifacts: Vec<Value>) -> Vec<u8> {
    let common = command.common();
    let mut scenarios: Vec<Value> = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for s in runs.iter().filter_map(|r| r.scenario.as_ref()) {
        if !seen.contains(&s.name.as_str()) {
            seen.push(&s.name);
            let config: Value = serde_json::from_str(&s.to_json()).expect("scenario json");
            scenarios.push(config);
        }
    }
    let doc = json!({
        "tool": "ntn-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": command.name(),
        "seed": common.seed,
        "sweep": common.sweep,
        "scenarios": scenarios,
        "runs": runs.iter().map(|r| {
            let mut m = run_header(r);
            m.insert("label".into(), json!(r.label(command.name())));
            Value::Object(m)
        }).collect::<Vec<_>>(),
        "artifacts": artifacts,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
    text.push('\n');
    text.into_bytes()
}

/// Writes through a temporary sibling and renames, so readers never see a partial file.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("ntn-lab").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn sweep_grid() {
        let s = parse_sweeps(&["a=1,2".into(), "b=x,y,z".into()], &["a", "b"]).unwrap();
        let g = grid(&s);
        assert_eq!(g.len(), 6);
        assert_eq!(
            g[0],
            vec![("a".into(), "1".into()), ("b".into(), "x".into())]
        );
        assert_eq!(
            g[5],
            vec![("a".into(), "2".into()), ("b".into(), "z".into())]
        );
        assert_eq!(grid(&[]), vec![Vec::new()]);
        assert!(parse_sweeps(&["c=1".into()], &["a"]).is_err());
        assert!(parse_sweeps(&["a".into()], &["a"]).is_err());
        assert!(parse_sweeps(&["a=".into()], &["a"]).is_err());
        assert!(parse_sweeps(&["a=1".into(), "a=2".into()], &["a"]).is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("abc"), "abc");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["geometry", "--bogus"]).0, 2);
        assert_eq!(run_capture(&[]).0, 2);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn validation_errors_exit_2() {
        let (code, _, err) = run_capture(&["simulate-ra", "--scenario", "nbiot_leo600"]);
        assert_eq!(code, 2);
        assert!(err.contains("--seed"));
        assert_eq!(run_capture(&["geometry", "--scenario", "mars"]).0, 2);
        assert_eq!(run_capture(&["geometry", "--sweep", "mu=0"]).0, 2);
        assert_eq!(run_capture(&["geometry", "--sweep", "altitude=-5"]).0, 2);
    }

    #[test]
    fn missing_scenario_file_is_runtime_error() {
        assert_eq!(
            run_capture(&["geometry", "--scenario", "/nonexistent/s.json"]).0,
            1
        );
    }

    #[test]
    fn geometry_stdout() {
        let (code, out, _) = run_capture(&["geometry", "--scenario", "nbiot_leo600"]);
        assert_eq!(code, 0);
        assert!(out.contains("# geometry_paths.csv"));
        assert!(
            out.contains("scenario,path,h_sat_km,elevation_deg,slant_range_km,one_way_delay_ms")
        );
        assert!(out.contains("nbiot_leo600,feeder,600,5,"));
    }

    #[test]
    fn seeds_follow_run_index() {
        let cmd = Cli::try_parse_from([
            "ntn-lab",
            "simulate-ra",
            "--scenario",
            "nbiot_leo600",
            "--seed",
            "10",
            "--sweep",
            "ues=1,2,3",
        ])
        .unwrap()
        .command;
        let runs = plan(&cmd).unwrap();
        let seeds: Vec<u64> = runs.iter().map(|r| r.seed.unwrap()).collect();
        assert_eq!(seeds, vec![10, 11, 12]);
        assert_eq!(runs[1].label("simulate-ra"), "nbiot_leo600_ues2");
    }

    #[test]
    fn default_scenarios() {
        let parse = |args: &[&str]| {
            let argv = std::iter::once("ntn-lab").chain(args.iter().copied());
            Cli::try_parse_from(argv).unwrap().command
        };
        assert_eq!(plan(&parse(&["geometry"])).unwrap().len(), 3);
        assert_eq!(plan(&parse(&["doppler"])).unwrap().len(), 2);
        let w = plan(&parse(&["waveform", "--seed", "1", "--sweep", "ibo=10,20"])).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w[0].scenario.is_none());
    }
}
