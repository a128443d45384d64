use rand::Rng;

use super::event::{ms_to_ns, SimTime};
use crate::error::{Error, Result};
use crate::geometry::round_trip_time_with;
use crate::scenario::{PhysicalConstants, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// UE towards the terminating node.
    Uplink,
    /// Terminating node towards the UE.
    Downlink,
}

/// Propagation channel between a UE and the node terminating its procedures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayChannel {
    pub uplink_delay_ms: f64,
    pub downlink_delay_ms: f64,
    pub loss_probability: f64,
    /// Upper bound of a uniform per-message extra delay.
    pub jitter_ms: f64,
}

impl DelayChannel {
    pub fn new(uplink_delay_ms: f64, downlink_delay_ms: f64) -> Result<Self> {
        let ch = DelayChannel {
            uplink_delay_ms,
            downlink_delay_ms,
            loss_probability: 0.0,
            jitter_ms: 0.0,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn symmetric(one_way_ms: f64) -> Result<Self> {
        Self::new(one_way_ms, one_way_ms)
    }

    /// Channel to the terminating node of `scenario`: the gateway-side gNB for
    /// transparent payloads, the satellite for regenerative ones.
    pub fn from_scenario(scenario: &ScenarioConfig) -> Result<Self> {
        Self::from_scenario_with(&PhysicalConstants::DEFAULT, scenario)
    }

    pub fn from_scenario_with(c: &PhysicalConstants, scenario: &ScenarioConfig) -> Result<Self> {
        Self::symmetric(round_trip_time_with(c, scenario)?.one_way_ms)
    }

    pub fn with_loss(mut self, p: f64) -> Result<Self> {
        self.loss_probability = p;
        self.validate()?;
        Ok(self)
    }

    pub fn with_jitter(mut self, jitter_ms: f64) -> Result<Self> {
        self.jitter_ms = jitter_ms;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("uplink_delay_ms", self.uplink_delay_ms),
            ("downlink_delay_ms", self.downlink_delay_ms),
            ("jitter_ms", self.jitter_ms),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(field, "must be finite and >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(Error::validation("loss_probability", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn delay_ms(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Uplink => self.uplink_delay_ms,
            Direction::Downlink => self.downlink_delay_ms,
        }
    }

    pub fn rtt_ms(&self) -> f64 {
        self.uplink_delay_ms + self.downlink_delay_ms
    }

    /// True if a message survives the channel. Draws from `rng` only when
    /// the loss probability is strictly between 0 and 1.
    pub fn survives<R: Rng>(&self, rng: &mut R) -> bool {
        if self.loss_probability <= 0.0 {
            true
        } else if self.loss_probability >= 1.0 {
            false
        } else {
            !rng.gen_bool(self.loss_probability)
        }
    }

    /// Delivery time of a message sent at `sent`, or `None` if it is lost.
    pub fn deliver<R: Rng>(&self, sent: SimTime, dir: Direction, rng: &mut R) -> Option<SimTime> {
        if !self.survives(rng) {
            return None;
        }
        let mut delay = self.delay_ms(dir);
        if self.jitter_ms > 0.0 {
            delay += rng.gen_range(0.0..self.jitter_ms);
        }
        Some(sent + ms_to_ns(delay))
    }
}
