use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerology::T_S;

pub const NPRACH_SCS_HZ: f64 = 3_750.0;
pub const SYMBOL_GROUPS: usize = 4;
pub const SYMBOLS_PER_GROUP: usize = 5;
pub const HOP_SUBCARRIERS: u8 = 12;
pub const MAX_REPETITIONS: u32 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NprachFormat {
    /// 66.7 µs cyclic prefix.
    F0,
    /// 266.7 µs cyclic prefix.
    F1,
}

impl NprachFormat {
    pub fn cp_s(self) -> f64 {
        match self {
            NprachFormat::F0 => 2048.0 * T_S,
            NprachFormat::F1 => 8192.0 * T_S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NprachPreamble {
    pub format: NprachFormat,
    pub repetitions: u32,
}

impl NprachPreamble {
    pub fn new(format: NprachFormat, repetitions: u32) -> Result<Self> {
        if repetitions == 0 || repetitions > MAX_REPETITIONS {
            return Err(Error::Range {
                what: "nprach repetitions",
                value: repetitions as f64,
                min: 1.0,
                max: MAX_REPETITIONS as f64,
            });
        }
        Ok(NprachPreamble {
            format,
            repetitions,
        })
    }

    pub fn symbol_duration_s() -> f64 {
        1.0 / NPRACH_SCS_HZ
    }

    /// Five symbols, about 1.333 ms.
    pub fn sequence_duration_s() -> f64 {
        SYMBOLS_PER_GROUP as f64 * Self::symbol_duration_s()
    }

    pub fn group_duration_s(&self) -> f64 {
        self.format.cp_s() + Self::sequence_duration_s()
    }

    pub fn total_duration_s(&self) -> f64 {
        self.repetitions as f64 * SYMBOL_GROUPS as f64 * self.group_duration_s()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolGroup {
    pub repetition: u32,
    pub group: u8,
    pub start_s: f64,
    pub subcarrier: u8,
}

/// Single-tone hopping schedule of a preamble.
///
/// Each repetition draws a fresh starting tone, distinct from the previous
/// repetition's, then hops ±1, ±6 and back ±1 tones across its four groups.
pub fn nprach_schedule(preamble: &NprachPreamble, seed: u64) -> Vec<SymbolGroup> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group_s = preamble.group_duration_s();
    let mut out = Vec::with_capacity(preamble.repetitions as usize * SYMBOL_GROUPS);
    let mut previous: Option<u8> = None;
    for rep in 0..preamble.repetitions {
        let first = match previous {
            None => rng.gen_range(0..HOP_SUBCARRIERS),
            Some(p) => {
                let k = rng.gen_range(0..HOP_SUBCARRIERS - 1);
                if k >= p {
                    k + 1
                } else {
                    k
                }
            }
        };
        previous = Some(first);
        let far = (first + 6) % HOP_SUBCARRIERS;
        let tones = [first, first ^ 1, far, far ^ 1];
        for (g, &tone) in tones.iter().enumerate() {
            let index = rep as usize * SYMBOL_GROUPS + g;
            out.push(SymbolGroup {
                repetition: rep,
                group: g as u8,
                start_s: index as f64 * group_s,
                subcarrier: tone,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn durations() {
        let f0 = NprachPreamble::new(NprachFormat::F0, 1).unwrap();
        let f1 = NprachPreamble::new(NprachFormat::F1, 1).unwrap();
        assert_relative_eq!(f0.total_duration_s(), 5.6e-3, max_relative = 1e-9);
        assert_relative_eq!(f1.total_duration_s(), 6.4e-3, max_relative = 1e-9);
        assert_relative_eq!(
            NprachPreamble::sequence_duration_s(),
            1.3333e-3,
            max_relative = 1e-4
        );
        assert!(NprachPreamble::new(NprachFormat::F0, 129).is_err());
        assert!(NprachPreamble::new(NprachFormat::F0, 0).is_err());
    }

    #[test]
    fn schedule_shape() {
        let p = NprachPreamble::new(NprachFormat::F1, 32).unwrap();
        let s = nprach_schedule(&p, 9);
        assert_eq!(s.len(), 128);
        assert!(s.iter().all(|g| g.subcarrier < 12));
        assert_relative_eq!(s[1].start_s - s[0].start_s, p.group_duration_s());
        for pair in s.chunks(4).collect::<Vec<_>>().windows(2) {
            let a: Vec<u8> = pair[0].iter().map(|g| g.subcarrier).collect();
            let b: Vec<u8> = pair[1].iter().map(|g| g.subcarrier).collect();
            assert_ne!(a, b);
        }
        assert_eq!(s, nprach_schedule(&p, 9));
    }

    #[test]
    fn hops_within_group() {
        let p = NprachPreamble::new(NprachFormat::F0, 8).unwrap();
        for rep in nprach_schedule(&p, 3).chunks(4) {
            let d1 = rep[1].subcarrier as i32 - rep[0].subcarrier as i32;
            let d2 = rep[2].subcarrier as i32 - rep[1].subcarrier as i32;
            assert_eq!(d1.abs(), 1);
            assert!(d2.abs() >= 5 && d2.abs() <= 7);
        }
    }
}
