use crate::error::{Error, Result};
use crate::numerology::{
    nbiot_max_ta_command, TaCommand, NBIOT_MAX_TA_S, NR_MAX_TA_COMMAND, T_C, T_S,
};

/// Uplink timing state of a connected UE.
#[derive(Debug, Clone, PartialEq)]
pub struct TaSession {
    aligned: bool,
    applied: Option<TaCommand>,
    pending: Vec<(u64, TaCommand)>,
    last_command_subframe: u64,
    timer_subframes: u64,
    /// NB-IoT uplink slot length in subframes.
    uplink_slot_subframes: u64,
}

impl TaSession {
    /// A freshly connected session whose alignment timer starts at `subframe`.
    pub fn connected(time_alignment_timer_s: f64, subframe: u64) -> Result<Self> {
        if !(time_alignment_timer_s.is_finite() && time_alignment_timer_s > 0.0) {
            return Err(Error::validation("time_alignment_timer_s", "must be > 0"));
        }
        Ok(TaSession {
            aligned: true,
            applied: None,
            pending: Vec::new(),
            last_command_subframe: subframe,
            timer_subframes: (time_alignment_timer_s * 1e3).round() as u64,
            uplink_slot_subframes: 1,
        })
    }

    pub fn with_uplink_slot(mut self, subframes: u64) -> Self {
        self.uplink_slot_subframes = subframes.max(1);
        self
    }

    pub fn is_aligned(&self) -> bool {
        self.aligned
    }

    pub fn applied_command(&self) -> Option<TaCommand> {
        self.applied
    }

    /// Advance currently applied to uplink frames (s).
    pub fn timing_advance_s(&self) -> f64 {
        self.applied.map_or(0.0, TaCommand::time_s)
    }

    /// Subframe at which a command received in `n` takes effect.
    pub fn effective_subframe(&self, command: TaCommand, n: u64) -> u64 {
        match command {
            TaCommand::Nr { .. } => n + command.apply_offset_subframes(),
            TaCommand::NbIot { .. } => {
                let earliest = n + command.apply_offset_subframes() + 1;
                earliest.div_ceil(self.uplink_slot_subframes) * self.uplink_slot_subframes
            }
        }
    }

    /// Moves the session clock to `subframe`, applying due commands and
    /// expiring the alignment timer.
    pub fn advance_to(&mut self, subframe: u64) {
        if self.aligned
            && subframe.saturating_sub(self.last_command_subframe) > self.timer_subframes
        {
            self.aligned = false;
            self.pending.clear();
        }
        let mut due: Vec<_> = self
            .pending
            .iter()
            .copied()
            .filter(|&(at, _)| at <= subframe)
            .collect();
        due.sort_by_key(|&(at, _)| at);
        if let Some(&(_, cmd)) = due.last() {
            self.applied = Some(cmd);
        }
        self.pending.retain(|&(at, _)| at > subframe);
    }

    /// Re-aligns the session after a successful random access at `subframe`.
    pub fn realign(&mut self, subframe: u64) {
        self.aligned = true;
        self.last_command_subframe = subframe;
    }
}

/// Accepts `command` received in `current_subframe`, restarts the alignment
/// timer and returns the subframe at which the new timing takes effect.
pub fn apply_timing_advance(
    session: &mut TaSession,
    command: TaCommand,
    current_subframe: u64,
) -> Result<u64> {
    session.advance_to(current_subframe);
    if !session.aligned {
        return Err(Error::Domain(
            "session is not time aligned; random access must be repeated".into(),
        ));
    }
    match command {
        TaCommand::Nr { t_a, mu } => {
            TaCommand::nr(t_a, mu)?;
        }
        TaCommand::NbIot { t_a } => {
            TaCommand::nbiot(t_a)?;
        }
    }
    let at = session.effective_subframe(command, current_subframe);
    session.pending.push((at, command));
    session.last_command_subframe = current_subframe;
    Ok(at)
}

/// Misalignment left after advancing by `granted` when the true round trip is `true_rtt_ms`.
pub fn uplink_timing_residual(true_rtt_ms: f64, granted: TaCommand) -> f64 {
    (true_rtt_ms * 1e-3 - granted.time_s()).abs()
}

/// In-range NR command closest to `true_rtt_ms`.
pub fn best_nr_command(true_rtt_ms: f64, mu: u8) -> Result<TaCommand> {
    let step = 16.0 * 64.0 / f64::from(1u32 << mu) * T_C;
    let required_s = true_rtt_ms * 1e-3;
    let max_s = NR_MAX_TA_COMMAND as f64 * step;
    if !(0.0..=max_s + step / 2.0).contains(&required_s) {
        return Err(Error::TaUnreachable { required_s, max_s });
    }
    let t_a = ((required_s / step).round() as u16).min(NR_MAX_TA_COMMAND);
    TaCommand::nr(t_a, mu)
}

/// In-budget NB-IoT command closest to `true_rtt_ms`.
pub fn best_nbiot_command(true_rtt_ms: f64) -> Result<TaCommand> {
    let step = 16.0 * T_S;
    let required_s = true_rtt_ms * 1e-3;
    let max = nbiot_max_ta_command();
    if !(0.0..=NBIOT_MAX_TA_S).contains(&required_s) {
        return Err(Error::TaUnreachable {
            required_s,
            max_s: NBIOT_MAX_TA_S,
        });
    }
    let t_a = ((required_s / step).round() as u32).min(max);
    TaCommand::nbiot(t_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerology::ta_time;

    #[test]
    fn nr_command_applies_six_subframes_later() {
        let mut s = TaSession::connected(10.24, 0).unwrap();
        let cmd = TaCommand::nr(100, 0).unwrap();
        assert_eq!(apply_timing_advance(&mut s, cmd, 10).unwrap(), 16);
        s.advance_to(15);
        assert_eq!(s.applied_command(), None);
        s.advance_to(16);
        assert_eq!(s.applied_command(), Some(cmd));
    }

    #[test]
    fn nbiot_command_applies_after_n_plus_12() {
        let mut s = TaSession::connected(10.24, 0).unwrap();
        let cmd = TaCommand::nbiot(10).unwrap();
        assert_eq!(apply_timing_advance(&mut s, cmd, 10).unwrap(), 23);
        let mut slotted = TaSession::connected(10.24, 0).unwrap().with_uplink_slot(8);
        assert_eq!(apply_timing_advance(&mut slotted, cmd, 10).unwrap(), 24);
    }

    #[test]
    fn timer_expiry_unaligns() {
        let mut s = TaSession::connected(10.24, 0).unwrap();
        s.advance_to(10_240);
        assert!(s.is_aligned());
        s.advance_to(10_241);
        assert!(!s.is_aligned());
        let cmd = TaCommand::nr(1, 0).unwrap();
        assert!(apply_timing_advance(&mut s, cmd, 10_242).is_err());
        s.realign(10_242);
        assert!(apply_timing_advance(&mut s, cmd, 10_243).is_ok());
    }

    #[test]
    fn commands_restart_timer() {
        let mut s = TaSession::connected(1.0, 0).unwrap();
        let cmd = TaCommand::nr(1, 0).unwrap();
        apply_timing_advance(&mut s, cmd, 900).unwrap();
        s.advance_to(1_800);
        assert!(s.is_aligned());
        s.advance_to(1_901);
        assert!(!s.is_aligned());
    }

    #[test]
    fn residuals() {
        let cmd = TaCommand::nr(640, 0).unwrap();
        assert_eq!(
            uplink_timing_residual(ta_time(640, 0).unwrap() * 1e3, cmd),
            0.0
        );
        let best = best_nr_command(0.3, 0).unwrap();
        assert!(uplink_timing_residual(0.3, best) <= ta_time(1, 0).unwrap() / 2.0 + 1e-15);
        assert!(uplink_timing_residual(0.3, best) <= 0.26e-6);
        assert!(matches!(
            best_nr_command(5.0, 0),
            Err(Error::TaUnreachable { .. })
        ));
        let nb = best_nbiot_command(0.5).unwrap();
        assert!(uplink_timing_residual(0.5, nb) <= 8.0 * T_S + 1e-15);
        assert!(best_nbiot_command(0.7).is_err());
    }
}
