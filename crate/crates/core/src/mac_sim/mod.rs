//! Deterministic discrete-event simulation of random access, timing advance
//! and HARQ over a satellite delay channel.

mod channel;
mod event;
mod harq;
mod nprach;
mod ra;
mod ta;

pub use channel::{DelayChannel, Direction};
pub use event::{align_up, ms_to_ns, ns_to_ms, EventLog, EventQueue, SimTime};
pub use harq::{
    simulate_harq, HarqConfig, HarqMode, HarqReport, HarqStats, ProcessState,
    NBIOT_DL_ACK_OFFSET_MS, NBIOT_DL_SCHEDULING_OFFSET_MS, NBIOT_UL_ACK_OFFSET_MS,
    NBIOT_UL_SCHEDULING_OFFSET_MS,
};
pub use nprach::{nprach_schedule, NprachFormat, NprachPreamble, SymbolGroup};
pub use ra::{
    simulate_ra, simulate_ra_logged, FailureCause, RaConfig, RaMode, RaOutcome, RaReport, RaState,
    PREAMBLE_SET_SIZE,
};
pub use ta::{
    apply_timing_advance, best_nbiot_command, best_nr_command, uplink_timing_residual, TaSession,
};
