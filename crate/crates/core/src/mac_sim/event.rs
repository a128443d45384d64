use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::io::Write;

/// Simulation time in nanoseconds.
pub type SimTime = u64;

pub const NS_PER_MS: f64 = 1e6;

pub fn ms_to_ns(ms: f64) -> SimTime {
    debug_assert!(ms >= 0.0 && ms.is_finite());
    (ms * NS_PER_MS).round() as SimTime
}

pub fn ns_to_ms(t: SimTime) -> f64 {
    t as f64 / NS_PER_MS
}

/// Round `t` up to the next multiple of `grid`.
pub fn align_up(t: SimTime, grid: SimTime) -> SimTime {
    if grid == 0 {
        return t;
    }
    t.div_ceil(grid) * grid
}

struct Entry<E> {
    time: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

/// Priority queue popping events in `(time, insertion order)` order.
pub struct EventQueue<E> {
    heap: BinaryHeap<Reverse<Entry<E>>>,
    seq: u64,
    now: SimTime,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            seq: 0,
            now: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Schedules `payload` at absolute time `time`.
    ///
    /// # Panics
    ///
    /// Panics if `time` lies before the current simulation time.
    pub fn schedule(&mut self, time: SimTime, payload: E) {
        assert!(
            time >= self.now,
            "event scheduled in the past: {time} < {}",
            self.now
        );
        self.heap.push(Reverse(Entry {
            time,
            seq: self.seq,
            payload,
        }));
        self.seq += 1;
    }

    pub fn schedule_in(&mut self, delay: SimTime, payload: E) {
        self.schedule(self.now + delay, payload);
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|Reverse(e)| e.time)
    }

    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        let Reverse(e) = self.heap.pop()?;
        debug_assert!(e.time >= self.now);
        self.now = e.time;
        Some((e.time, e.payload))
    }
}

/// Line-oriented event trace: `t=<s> node=<name> ev=<kind> detail=<k:v,...>`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    enabled: bool,
    lines: Vec<String>,
}

impl EventLog {
    pub fn new() -> Self {
        EventLog {
            enabled: true,
            lines: Vec::new(),
        }
    }

    pub fn disabled() -> Self {
        EventLog {
            enabled: false,
            lines: Vec::new(),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn record(&mut self, t: SimTime, node: &str, kind: &str, detail: &[(&str, String)]) {
        if !self.enabled {
            return;
        }
        let mut line = format!(
            "t={}.{:09} node={} ev={} detail=",
            t / 1_000_000_000,
            t % 1_000_000_000,
            node,
            kind
        );
        for (i, (k, v)) in detail.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{k}:{v}");
        }
        self.lines.push(line);
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for line in &self.lines {
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.lines.iter().map(|l| l.len() + 1).sum());
        for line in &self.lines {
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}
