use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::channel::{DelayChannel, Direction};
use super::event::{align_up, ms_to_ns, ns_to_ms, EventLog, EventQueue, SimTime};
use super::nprach::{NprachFormat, NprachPreamble};
use crate::error::{Error, Result};
use crate::scenario::{ScenarioConfig, Service};

pub const PREAMBLE_SET_SIZE: u8 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RaMode {
    ContentionBased,
    ContentionFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RaState {
    Idle,
    WaitRar,
    WaitContentionResolution,
    Connected,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FailureCause {
    RarWindowExpired,
    ContentionResolutionExpired,
    ContentionLost,
}

/// Knobs of a random access run that are not part of the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RaConfig {
    pub n_ues: usize,
    pub mode: RaMode,
    /// Every UE uses this preamble instead of drawing one.
    pub forced_preamble: Option<u8>,
    pub gnb_processing_ms: f64,
    pub ue_processing_ms: f64,
    /// Extra msg3/msg4 delay towards the core network for relay architectures.
    pub core_delay_ms: f64,
    pub backoff_max_ms: u32,
    pub occasion_period_ms: f64,
    /// NB-IoT repetitions per coverage level.
    pub nbiot_repetitions: [u32; 3],
    pub nprach_format: NprachFormat,
}

impl RaConfig {
    pub fn new(n_ues: usize) -> Self {
        RaConfig {
            n_ues,
            mode: RaMode::ContentionBased,
            forced_preamble: None,
            gnb_processing_ms: 0.0,
            ue_processing_ms: 0.0,
            core_delay_ms: 0.0,
            backoff_max_ms: 10,
            occasion_period_ms: 1.0,
            nbiot_repetitions: [8, 32, 128],
            nprach_format: NprachFormat::F0,
        }
    }

    pub fn contention_free(mut self) -> Self {
        self.mode = RaMode::ContentionFree;
        self
    }

    pub fn with_forced_preamble(mut self, preamble: u8) -> Self {
        self.forced_preamble = Some(preamble);
        self
    }

    pub fn validate(&self, scenario: &ScenarioConfig) -> Result<()> {
        if self.n_ues == 0 {
            return Err(Error::validation("n_ues", "must be >= 1"));
        }
        if scenario.service == Service::NbIot && self.mode == RaMode::ContentionFree {
            return Err(Error::Config(
                "NB-IoT supports only contention-based random access".into(),
            ));
        }
        if let Some(p) = self.forced_preamble {
            if p >= PREAMBLE_SET_SIZE {
                return Err(Error::validation("forced_preamble", "must be < 64"));
            }
        }
        for (field, v) in [
            ("gnb_processing_ms", self.gnb_processing_ms),
            ("ue_processing_ms", self.ue_processing_ms),
            ("core_delay_ms", self.core_delay_ms),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(field, "must be finite and >= 0"));
            }
        }
        if !(self.occasion_period_ms.is_finite() && self.occasion_period_ms > 0.0) {
            return Err(Error::validation("occasion_period_ms", "must be > 0"));
        }
        for &r in &self.nbiot_repetitions {
            if r == 0 || r > scenario.timers.nbiot_max_repetitions {
                return Err(Error::validation(
                    "nbiot_repetitions",
                    format!("{r} outside 1..={}", scenario.timers.nbiot_max_repetitions),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaOutcome {
    pub ue: usize,
    pub state: RaState,
    pub success: bool,
    /// From the first preamble transmission to msg4 (or RAR when contention-free).
    pub access_delay_ms: Option<f64>,
    pub attempts: u32,
    pub contention_failures: u32,
    pub coverage_level: usize,
    pub failure_cause: Option<FailureCause>,
}

#[derive(Debug, Clone)]
pub struct RaReport {
    pub outcomes: Vec<RaOutcome>,
    pub log: EventLog,
}

impl RaReport {
    pub fn success_rate(&self) -> f64 {
        let ok = self.outcomes.iter().filter(|o| o.success).count();
        ok as f64 / self.outcomes.len() as f64
    }
}

struct Ue {
    state: RaState,
    attempt: u32,
    level: usize,
    level_attempts: u32,
    contention_failures: u32,
    first_start: Option<SimTime>,
    window_end: SimTime,
    cr_end: SimTime,
    done_at: Option<SimTime>,
    cause: Option<FailureCause>,
}

#[derive(Debug)]
enum Ev {
    StartAttempt {
        ue: usize,
    },
    GnbRxPreamble {
        ue: usize,
        attempt: u32,
        preamble: u8,
    },
    UeRxRar {
        ue: usize,
        attempt: u32,
        grant: usize,
    },
    RarWindowEnd {
        ue: usize,
        attempt: u32,
    },
    UeTxMsg3 {
        ue: usize,
        attempt: u32,
        grant: usize,
    },
    GnbRxMsg3 {
        ue: usize,
        attempt: u32,
        grant: usize,
    },
    GnbResolve {
        grant: usize,
    },
    UeRxMsg4 {
        ue: usize,
        attempt: u32,
        winner: usize,
    },
    CrEnd {
        ue: usize,
        attempt: u32,
    },
}

#[derive(Default)]
struct Grant {
    msg3: Vec<(usize, u32)>,
}

struct Sim<'a> {
    scenario: &'a ScenarioConfig,
    channel: &'a DelayChannel,
    cfg: &'a RaConfig,
    rng: ChaCha8Rng,
    q: EventQueue<Ev>,
    log: EventLog,
    ues: Vec<Ue>,
    grants: Vec<Grant>,
    grant_index: HashMap<(SimTime, u8, Option<usize>), usize>,
}

fn ue_name(ue: usize) -> String {
    format!("ue{ue}")
}

impl Sim<'_> {
    fn nbiot(&self) -> bool {
        self.scenario.service == Service::NbIot
    }

    fn preamble_airtime(&self, level: usize) -> Result<SimTime> {
        if !self.nbiot() {
            return Ok(0);
        }
        let reps = self.cfg.nbiot_repetitions[level.min(2)];
        let p = NprachPreamble::new(self.cfg.nprach_format, reps)?;
        Ok(ms_to_ns(p.total_duration_s() * 1e3))
    }

    /// NB-IoT RAR window opens 4 subframes after the preamble, or 64 for long repetitions.
    fn rar_window_offset(&self, level: usize) -> SimTime {
        if !self.nbiot() {
            return 0;
        }
        if self.cfg.nbiot_repetitions[level.min(2)] >= 64 {
            ms_to_ns(64.0)
        } else {
            ms_to_ns(4.0)
        }
    }

    fn core_delay(&self) -> SimTime {
        if self.scenario.architecture.uses_relay_nodes() {
            ms_to_ns(self.cfg.core_delay_ms)
        } else {
            0
        }
    }

    fn start_attempt(&mut self, t: SimTime, ue: usize) -> Result<()> {
        let preamble = match self.cfg.forced_preamble {
            Some(p) => p,
            None => self.rng.gen_range(0..PREAMBLE_SET_SIZE),
        };
        let u = &mut self.ues[ue];
        u.attempt += 1;
        u.level_attempts += 1;
        u.state = RaState::WaitRar;
        u.first_start.get_or_insert(t);
        let attempt = u.attempt;
        let level = u.level;
        let airtime = self.preamble_airtime(level)?;
        let end = t + airtime;
        let window_start = end + self.rar_window_offset(level);
        let window_end = window_start + ms_to_ns(self.scenario.timers.rar_window_ms);
        let u = &mut self.ues[ue];
        u.window_end = window_end;
        self.log.record(
            t,
            &ue_name(ue),
            "msg1_tx",
            &[
                ("attempt", attempt.to_string()),
                ("preamble", preamble.to_string()),
                ("level", level.to_string()),
            ],
        );
        if let Some(rx) = self.channel.deliver(end, Direction::Uplink, &mut self.rng) {
            self.q.schedule(
                rx,
                Ev::GnbRxPreamble {
                    ue,
                    attempt,
                    preamble,
                },
            );
        }
        self.q
            .schedule(window_end, Ev::RarWindowEnd { ue, attempt });
        Ok(())
    }

    fn retry_or_fail(&mut self, t: SimTime, ue: usize, cause: FailureCause) {
        let timers = self.scenario.timers;
        let nbiot = self.nbiot();
        let u = &mut self.ues[ue];
        let mut exhausted = u.attempt >= timers.preamble_max_attempts;
        if matches!(
            cause,
            FailureCause::ContentionLost | FailureCause::ContentionResolutionExpired
        ) {
            u.contention_failures += 1;
            exhausted |= u.contention_failures >= timers.contention_max_attempts;
        }
        if nbiot && u.level_attempts >= timers.nbiot_attempts_per_level {
            if u.level + 1 < timers.nbiot_coverage_levels as usize {
                u.level += 1;
                u.level_attempts = 0;
            } else {
                exhausted = true;
            }
        }
        if exhausted {
            u.state = RaState::Failed;
            u.cause = Some(cause);
            u.done_at = Some(t);
            let attempts = u.attempt;
            self.log.record(
                t,
                &ue_name(ue),
                "failed",
                &[
                    ("cause", format!("{cause:?}")),
                    ("attempts", attempts.to_string()),
                ],
            );
            return;
        }
        u.state = RaState::Idle;
        let level = u.level;
        let backoff = if self.cfg.backoff_max_ms > 0 {
            self.rng.gen_range(0..=self.cfg.backoff_max_ms)
        } else {
            0
        };
        let next = align_up(t, ms_to_ns(self.cfg.occasion_period_ms)) + ms_to_ns(backoff as f64);
        self.log.record(
            t,
            &ue_name(ue),
            "backoff",
            &[
                ("cause", format!("{cause:?}")),
                ("backoff_ms", backoff.to_string()),
                ("level", level.to_string()),
            ],
        );
        self.q.schedule(next, Ev::StartAttempt { ue });
    }

    fn current(&self, ue: usize, attempt: u32, state: RaState) -> bool {
        let u = &self.ues[ue];
        u.attempt == attempt && u.state == state
    }

    fn handle(&mut self, t: SimTime, ev: Ev) -> Result<()> {
        match ev {
            Ev::StartAttempt { ue } => self.start_attempt(t, ue)?,
            Ev::GnbRxPreamble {
                ue,
                attempt,
                preamble,
            } => {
                let dedicated = (self.cfg.mode == RaMode::ContentionFree).then_some(ue);
                let next_id = self.grants.len();
                let grant = *self
                    .grant_index
                    .entry((t, preamble, dedicated))
                    .or_insert(next_id);
                if grant == next_id {
                    self.grants.push(Grant::default());
                }
                self.log.record(
                    t,
                    "gnb",
                    "msg1_rx",
                    &[
                        ("ue", ue.to_string()),
                        ("preamble", preamble.to_string()),
                        ("grant", grant.to_string()),
                    ],
                );
                let sent = t + ms_to_ns(self.cfg.gnb_processing_ms);
                if let Some(rx) = self
                    .channel
                    .deliver(sent, Direction::Downlink, &mut self.rng)
                {
                    self.q.schedule(rx, Ev::UeRxRar { ue, attempt, grant });
                }
            }
            Ev::UeRxRar { ue, attempt, grant } => {
                if !self.current(ue, attempt, RaState::WaitRar) || t >= self.ues[ue].window_end {
                    self.log.record(
                        t,
                        &ue_name(ue),
                        "rar_ignored",
                        &[("attempt", attempt.to_string())],
                    );
                    return Ok(());
                }
                self.log.record(
                    t,
                    &ue_name(ue),
                    "rar_rx",
                    &[
                        ("attempt", attempt.to_string()),
                        ("grant", grant.to_string()),
                    ],
                );
                if self.cfg.mode == RaMode::ContentionFree {
                    self.connect(t, ue);
                    return Ok(());
                }
                self.ues[ue].state = RaState::WaitContentionResolution;
                let sent = t + ms_to_ns(self.cfg.ue_processing_ms);
                self.q.schedule(sent, Ev::UeTxMsg3 { ue, attempt, grant });
            }
            Ev::UeTxMsg3 { ue, attempt, grant } => {
                let cr_end = t + ms_to_ns(self.scenario.timers.contention_resolution_ms);
                self.ues[ue].cr_end = cr_end;
                self.log.record(
                    t,
                    &ue_name(ue),
                    "msg3_tx",
                    &[("attempt", attempt.to_string())],
                );
                if let Some(rx) = self.channel.deliver(t, Direction::Uplink, &mut self.rng) {
                    self.q.schedule(rx, Ev::GnbRxMsg3 { ue, attempt, grant });
                }
                self.q.schedule(cr_end, Ev::CrEnd { ue, attempt });
            }
            Ev::RarWindowEnd { ue, attempt } => {
                if self.current(ue, attempt, RaState::WaitRar) {
                    self.log.record(
                        t,
                        &ue_name(ue),
                        "rar_window_expired",
                        &[("attempt", attempt.to_string())],
                    );
                    self.retry_or_fail(t, ue, FailureCause::RarWindowExpired);
                }
            }
            Ev::GnbRxMsg3 { ue, attempt, grant } => {
                self.log.record(
                    t,
                    "gnb",
                    "msg3_rx",
                    &[("ue", ue.to_string()), ("grant", grant.to_string())],
                );
                let g = &mut self.grants[grant];
                g.msg3.push((ue, attempt));
                if g.msg3.len() == 1 {
                    self.q.schedule(t, Ev::GnbResolve { grant });
                }
            }
            Ev::GnbResolve { grant } => {
                let contenders = std::mem::take(&mut self.grants[grant].msg3);
                let winner = contenders
                    .iter()
                    .map(|&(ue, _)| ue)
                    .min()
                    .expect("resolve without msg3");
                self.log.record(
                    t,
                    "gnb",
                    "msg4_tx",
                    &[
                        ("grant", grant.to_string()),
                        ("winner", winner.to_string()),
                        ("contenders", contenders.len().to_string()),
                    ],
                );
                let sent = t + ms_to_ns(self.cfg.gnb_processing_ms) + self.core_delay();
                for (ue, attempt) in contenders {
                    if let Some(rx) = self
                        .channel
                        .deliver(sent, Direction::Downlink, &mut self.rng)
                    {
                        self.q.schedule(
                            rx,
                            Ev::UeRxMsg4 {
                                ue,
                                attempt,
                                winner,
                            },
                        );
                    }
                }
            }
            Ev::UeRxMsg4 {
                ue,
                attempt,
                winner,
            } => {
                if !self.current(ue, attempt, RaState::WaitContentionResolution)
                    || t >= self.ues[ue].cr_end
                {
                    self.log.record(
                        t,
                        &ue_name(ue),
                        "msg4_ignored",
                        &[("attempt", attempt.to_string())],
                    );
                    return Ok(());
                }
                if winner == ue {
                    self.log.record(
                        t,
                        &ue_name(ue),
                        "msg4_rx",
                        &[("attempt", attempt.to_string())],
                    );
                    self.connect(t, ue);
                } else {
                    self.log.record(
                        t,
                        &ue_name(ue),
                        "contention_lost",
                        &[
                            ("attempt", attempt.to_string()),
                            ("winner", winner.to_string()),
                        ],
                    );
                    self.retry_or_fail(t, ue, FailureCause::ContentionLost);
                }
            }
            Ev::CrEnd { ue, attempt } => {
                if self.current(ue, attempt, RaState::WaitContentionResolution) {
                    self.log.record(
                        t,
                        &ue_name(ue),
                        "cr_expired",
                        &[("attempt", attempt.to_string())],
                    );
                    self.retry_or_fail(t, ue, FailureCause::ContentionResolutionExpired);
                }
            }
        }
        Ok(())
    }

    fn connect(&mut self, t: SimTime, ue: usize) {
        let u = &mut self.ues[ue];
        u.state = RaState::Connected;
        u.done_at = Some(t);
        let attempts = u.attempt;
        self.log.record(
            t,
            &ue_name(ue),
            "connected",
            &[("attempts", attempts.to_string())],
        );
    }
}

/// Runs the random access procedure for `cfg.n_ues` UEs starting together at t = 0.
pub fn simulate_ra(
    scenario: &ScenarioConfig,
    channel: &DelayChannel,
    cfg: &RaConfig,
    seed: u64,
) -> Result<RaReport> {
    simulate_ra_logged(scenario, channel, cfg, seed, true)
}

pub fn simulate_ra_logged(
    scenario: &ScenarioConfig,
    channel: &DelayChannel,
    cfg: &RaConfig,
    seed: u64,
    keep_log: bool,
) -> Result<RaReport> {
    scenario.validate()?;
    channel.validate()?;
    cfg.validate(scenario)?;
    let mut sim = Sim {
        scenario,
        channel,
        cfg,
        rng: ChaCha8Rng::seed_from_u64(seed),
        q: EventQueue::new(),
        log: if keep_log {
            EventLog::new()
        } else {
            EventLog::disabled()
        },
        ues: (0..cfg.n_ues)
            .map(|_| Ue {
                state: RaState::Idle,
                attempt: 0,
                level: 0,
                level_attempts: 0,
                contention_failures: 0,
                first_start: None,
                window_end: 0,
                cr_end: 0,
                done_at: None,
                cause: None,
            })
            .collect(),
        grants: Vec::new(),
        grant_index: HashMap::new(),
    };
    for ue in 0..cfg.n_ues {
        sim.q.schedule(0, Ev::StartAttempt { ue });
    }
    while let Some((t, ev)) = sim.q.pop() {
        sim.handle(t, ev)?;
    }
    let outcomes = sim
        .ues
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let success = u.state == RaState::Connected;
            RaOutcome {
                ue: i,
                state: u.state,
                success,
                access_delay_ms: match (success, u.first_start, u.done_at) {
                    (true, Some(a), Some(b)) => Some(ns_to_ms(b - a)),
                    _ => None,
                },
                attempts: u.attempt,
                contention_failures: u.contention_failures,
                coverage_level: u.level,
                failure_cause: u.cause,
            }
        })
        .collect();
    Ok(RaReport {
        outcomes,
        log: sim.log,
    })
}
