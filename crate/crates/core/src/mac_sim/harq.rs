use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::channel::{DelayChannel, Direction};
use super::event::{align_up, ms_to_ns, ns_to_ms, EventLog, EventQueue, SimTime};
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

pub const NBIOT_DL_ACK_OFFSET_MS: f64 = 12.0;
pub const NBIOT_DL_SCHEDULING_OFFSET_MS: f64 = 4.0;
pub const NBIOT_UL_ACK_OFFSET_MS: f64 = 3.0;
pub const NBIOT_UL_SCHEDULING_OFFSET_MS: f64 = 8.0;
const SUBFRAME_MS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HarqMode {
    /// One TB per TTI, ACK k subframes after reception, asynchronous retransmissions.
    NrAsyncAdaptive,
    /// Bundles of repeated subframes; a NACK retransmits the whole bundle.
    NbIotBundled {
        uplink: bool,
        bundle_repetitions: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProcessState {
    Free,
    InFlight,
    WaitRetx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarqConfig {
    pub n_processes: u32,
    pub tti_ms: f64,
    pub duration_ms: f64,
    pub mode: HarqMode,
    /// ACK offset in subframes; also the grant-to-retransmission delay in NR mode.
    pub ack_offset_k: u32,
    pub max_retransmissions: u32,
    pub keep_log: bool,
}

impl HarqConfig {
    pub fn nr(n_processes: u32, tti_ms: f64, duration_ms: f64) -> Self {
        HarqConfig {
            n_processes,
            tti_ms,
            duration_ms,
            mode: HarqMode::NrAsyncAdaptive,
            ack_offset_k: 4,
            max_retransmissions: 3,
            keep_log: true,
        }
    }

    pub fn nbiot(
        n_processes: u32,
        bundle_repetitions: u32,
        uplink: bool,
        duration_ms: f64,
    ) -> Self {
        HarqConfig {
            n_processes,
            tti_ms: SUBFRAME_MS,
            duration_ms,
            mode: HarqMode::NbIotBundled {
                uplink,
                bundle_repetitions,
            },
            ack_offset_k: 4,
            max_retransmissions: 3,
            keep_log: true,
        }
    }

    /// NR configuration taking k and the TTI from the scenario.
    pub fn for_scenario(scenario: &ScenarioConfig, n_processes: u32, duration_ms: f64) -> Self {
        let mut cfg = Self::nr(
            n_processes,
            1.0 / f64::from(1u32 << scenario.mu),
            duration_ms,
        );
        cfg.ack_offset_k = scenario.timers.harq_ack_offset_k;
        cfg
    }

    pub fn without_log(mut self) -> Self {
        self.keep_log = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_processes == 0 {
            return Err(Error::validation("n_processes", "must be >= 1"));
        }
        for (field, v) in [("tti_ms", self.tti_ms), ("duration_ms", self.duration_ms)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(field, "must be finite and > 0"));
            }
        }
        if let HarqMode::NbIotBundled {
            bundle_repetitions, ..
        } = self.mode
        {
            if !(1..=2).contains(&self.n_processes) {
                return Err(Error::validation(
                    "n_processes",
                    "NB-IoT allows 1 or 2 HARQ processes",
                ));
            }
            if bundle_repetitions == 0 || bundle_repetitions > 128 {
                return Err(Error::validation(
                    "bundle_repetitions",
                    "must lie in 1..=128",
                ));
            }
        }
        Ok(())
    }

    /// Airtime of one transmission (a TTI, or a whole bundle).
    pub fn airtime_ms(&self) -> f64 {
        match self.mode {
            HarqMode::NrAsyncAdaptive => self.tti_ms,
            HarqMode::NbIotBundled {
                bundle_repetitions, ..
            } => bundle_repetitions as f64 * self.tti_ms,
        }
    }

    fn data_direction(&self) -> Direction {
        match self.mode {
            HarqMode::NbIotBundled { uplink: true, .. } => Direction::Uplink,
            _ => Direction::Downlink,
        }
    }

    /// Delay from the start of reception to the feedback transmission.
    fn feedback_offset_ms(&self) -> f64 {
        match self.mode {
            HarqMode::NrAsyncAdaptive => self.ack_offset_k as f64 * SUBFRAME_MS,
            HarqMode::NbIotBundled { uplink, .. } => {
                self.airtime_ms()
                    + if uplink {
                        NBIOT_UL_ACK_OFFSET_MS
                    } else {
                        NBIOT_DL_ACK_OFFSET_MS
                    }
            }
        }
    }

    /// Delay from feedback reception to the earliest next transmission.
    fn reschedule_offset_ms(&self) -> f64 {
        match self.mode {
            HarqMode::NrAsyncAdaptive => self.ack_offset_k as f64 * SUBFRAME_MS,
            HarqMode::NbIotBundled { uplink, .. } => {
                if uplink {
                    NBIOT_UL_SCHEDULING_OFFSET_MS
                } else {
                    NBIOT_DL_SCHEDULING_OFFSET_MS
                }
            }
        }
    }

    /// Per-process cycle T_HARQ on `channel`, aligned to the TTI grid.
    pub fn cycle_ms(&self, channel: &DelayChannel) -> f64 {
        let raw = channel.rtt_ms() + self.feedback_offset_ms() + self.reschedule_offset_ms();
        ns_to_ms(align_up(ms_to_ns(raw), ms_to_ns(self.tti_ms)))
    }

    /// Closed-form lossless utilization `min(1, N·airtime/T_HARQ)`.
    pub fn expected_utilization(&self, channel: &DelayChannel) -> f64 {
        (self.n_processes as f64 * self.airtime_ms() / self.cycle_ms(channel)).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarqStats {
    pub tbs_sent: u64,
    pub tbs_acked: u64,
    pub tbs_dropped: u64,
    pub tbs_in_flight: u64,
    pub transmissions: u64,
    pub retransmissions: u64,
    pub max_in_flight: u32,
    pub busy_ms: f64,
    pub duration_ms: f64,
    pub cycle_ms: f64,
    pub utilization: f64,
    pub throughput_tb_per_s: f64,
}

#[derive(Debug, Clone)]
pub struct HarqReport {
    pub stats: HarqStats,
    pub log: EventLog,
}

#[derive(Debug, Clone, Copy)]
struct Process {
    state: ProcessState,
    ready_at: SimTime,
    tb: u64,
    retx: u32,
}

enum Ev {
    TxSlot,
    TbRx { pid: usize, decoded: bool },
    FeedbackTx { pid: usize, ack: bool },
    FeedbackRx { pid: usize, ack: bool },
}

fn pid_name(pid: usize) -> String {
    pid.to_string()
}

/// Saturated stop-and-wait HARQ over `channel`: the sender keeps every free
/// process loaded and decoding fails with the channel's loss probability.
pub fn simulate_harq(channel: &DelayChannel, cfg: &HarqConfig, seed: u64) -> Result<HarqReport> {
    channel.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = EventQueue::new();
    let mut log = if cfg.keep_log {
        EventLog::new()
    } else {
        EventLog::disabled()
    };
    let mut procs = vec![
        Process {
            state: ProcessState::Free,
            ready_at: 0,
            tb: 0,
            retx: 0,
        };
        cfg.n_processes as usize
    ];
    let (sender, receiver) = match cfg.data_direction() {
        Direction::Downlink => ("gnb", "ue"),
        Direction::Uplink => ("ue", "gnb"),
    };
    let forward = cfg.data_direction();
    let backward = match forward {
        Direction::Downlink => Direction::Uplink,
        Direction::Uplink => Direction::Downlink,
    };
    let tti = ms_to_ns(cfg.tti_ms);
    let airtime = ms_to_ns(cfg.airtime_ms());
    let duration = ms_to_ns(cfg.duration_ms);
    let fb_offset = ms_to_ns(cfg.feedback_offset_ms());
    let resched = ms_to_ns(cfg.reschedule_offset_ms());
    let delay = |dir: Direction, rng: &mut ChaCha8Rng| {
        let mut d = channel.delay_ms(dir);
        if channel.jitter_ms > 0.0 {
            d += rng.gen_range(0.0..channel.jitter_ms);
        }
        ms_to_ns(d)
    };

    let mut sender_free_at: SimTime = 0;
    let mut next_tb: u64 = 0;
    let mut in_flight: u32 = 0;
    let mut s = HarqStats {
        tbs_sent: 0,
        tbs_acked: 0,
        tbs_dropped: 0,
        tbs_in_flight: 0,
        transmissions: 0,
        retransmissions: 0,
        max_in_flight: 0,
        busy_ms: 0.0,
        duration_ms: cfg.duration_ms,
        cycle_ms: cfg.cycle_ms(channel),
        utilization: 0.0,
        throughput_tb_per_s: 0.0,
    };
    let mut busy: SimTime = 0;

    q.schedule(0, Ev::TxSlot);
    while let Some(t) = q.peek_time() {
        if t >= duration {
            break;
        }
        let (t, ev) = q.pop().expect("peeked");
        match ev {
            Ev::TxSlot => {
                if t + tti < duration {
                    q.schedule(t + tti, Ev::TxSlot);
                }
                if t < sender_free_at {
                    continue;
                }
                let ready =
                    |st: ProcessState| procs.iter().position(|p| p.state == st && p.ready_at <= t);
                let Some(pid) = ready(ProcessState::WaitRetx).or_else(|| ready(ProcessState::Free))
                else {
                    continue;
                };
                let p = &mut procs[pid];
                let kind = if p.state == ProcessState::Free {
                    p.tb = next_tb;
                    p.retx = 0;
                    next_tb += 1;
                    s.tbs_sent += 1;
                    in_flight += 1;
                    "tb_tx"
                } else {
                    s.retransmissions += 1;
                    "tb_retx"
                };
                p.state = ProcessState::InFlight;
                s.transmissions += 1;
                s.max_in_flight = s.max_in_flight.max(in_flight);
                assert!(
                    in_flight <= cfg.n_processes,
                    "in-flight TBs exceed process count"
                );
                busy += airtime.min(duration - t);
                sender_free_at = t + airtime;
                log.record(
                    t,
                    sender,
                    kind,
                    &[
                        ("pid", pid_name(pid)),
                        ("tb", p.tb.to_string()),
                        ("retx", p.retx.to_string()),
                    ],
                );
                let decoded = channel.survives(&mut rng);
                let rx = t + delay(forward, &mut rng);
                q.schedule(rx, Ev::TbRx { pid, decoded });
            }
            Ev::TbRx { pid, decoded } => {
                log.record(
                    t,
                    receiver,
                    "tb_rx",
                    &[
                        ("pid", pid_name(pid)),
                        ("tb", procs[pid].tb.to_string()),
                        ("ok", decoded.to_string()),
                    ],
                );
                q.schedule(t + fb_offset, Ev::FeedbackTx { pid, ack: decoded });
            }
            Ev::FeedbackTx { pid, ack } => {
                log.record(
                    t,
                    receiver,
                    if ack { "ack_tx" } else { "nack_tx" },
                    &[("pid", pid_name(pid))],
                );
                let rx = t + delay(backward, &mut rng);
                q.schedule(rx, Ev::FeedbackRx { pid, ack });
            }
            Ev::FeedbackRx { pid, ack } => {
                let p = &mut procs[pid];
                p.ready_at = t + resched;
                let kind = if ack {
                    s.tbs_acked += 1;
                    in_flight -= 1;
                    p.state = ProcessState::Free;
                    "ack_rx"
                } else if p.retx >= cfg.max_retransmissions {
                    s.tbs_dropped += 1;
                    in_flight -= 1;
                    p.state = ProcessState::Free;
                    "tb_dropped"
                } else {
                    p.retx += 1;
                    p.state = ProcessState::WaitRetx;
                    "nack_rx"
                };
                log.record(
                    t,
                    sender,
                    kind,
                    &[("pid", pid_name(pid)), ("tb", p.tb.to_string())],
                );
            }
        }
    }
    s.tbs_in_flight = in_flight as u64;
    debug_assert_eq!(s.tbs_sent, s.tbs_acked + s.tbs_dropped + s.tbs_in_flight);
    s.busy_ms = ns_to_ms(busy);
    s.utilization = s.busy_ms / cfg.duration_ms;
    s.throughput_tb_per_s = s.tbs_acked as f64 / (cfg.duration_ms / 1e3);
    Ok(HarqReport { stats: s, log })
}
