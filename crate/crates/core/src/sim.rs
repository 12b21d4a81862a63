//! Deterministic discrete-event engine.
//!
//! Events are ordered by `(fire_at, seq)` where `seq` is a global insertion
//! counter, so two events scheduled for the same instant fire in the order
//! they were scheduled. Cancellation is lazy: cancelled entries stay in the
//! heap and are skipped when popped.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Simulated time in microseconds since the start of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000)
    }

    /// Rounds to the nearest microsecond.
    pub fn from_millis_f64(ms: f64) -> Self {
        SimTime((ms * 1_000.0).round().max(0.0) as u64)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_millis_f64(self) -> f64 {
        self.0 as f64 / 1_000.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1_000_000.0
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    pub fn saturating_mul(self, k: u64) -> SimTime {
        SimTime(self.0.saturating_mul(k))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        *self = *self + rhs;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_sub(rhs.0).expect("SimTime subtraction underflow"))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(u64);

impl EventId {
    pub fn raw(self) -> u64 {
        self.0
    }
}

/// An event handed back by the scheduler when it fires.
#[derive(Debug)]
pub struct SimEvent<E> {
    pub id: EventId,
    pub fire_at: SimTime,
    pub seq: u64,
    pub payload: E,
}

struct Entry<E> {
    fire_at: SimTime,
    seq: u64,
    id: EventId,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // BinaryHeap is a max-heap; invert so the earliest (fire_at, seq) is on top.
    fn cmp(&self, other: &Self) -> Ordering {
        other.fire_at.cmp(&self.fire_at).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Priority event queue plus the simulation clock.
pub struct Scheduler<E> {
    now: SimTime,
    heap: BinaryHeap<Entry<E>>,
    pending: HashSet<EventId>,
    next_seq: u64,
    processed: u64,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Self {
            now: SimTime::ZERO,
            heap: BinaryHeap::new(),
            pending: HashSet::new(),
            next_seq: 0,
            processed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Total events fired since the scheduler was created.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Enqueues `payload` to fire at `at`.
    ///
    /// Panics if `at` lies before the current clock.
    pub fn schedule(&mut self, at: SimTime, payload: E) -> EventId {
        assert!(at >= self.now, "event scheduled in the past: at={at} now={}", self.now);
        let seq = self.next_seq;
        self.next_seq += 1;
        let id = EventId(seq);
        self.heap.push(Entry {
            fire_at: at,
            seq,
            id,
            payload,
        });
        self.pending.insert(id);
        id
    }

    pub fn schedule_in(&mut self, delay: SimTime, payload: E) -> EventId {
        let at = self.now + delay;
        self.schedule(at, payload)
    }

    /// Returns true iff `id` was pending. Fired and unknown ids return false.
    pub fn cancel(&mut self, id: EventId) -> bool {
        self.pending.remove(&id)
    }

    pub fn is_pending(&self, id: EventId) -> bool {
        self.pending.contains(&id)
    }

    fn peek_live(&mut self) -> Option<SimTime> {
        while let Some(top) = self.heap.peek() {
            if self.pending.contains(&top.id) {
                return Some(top.fire_at);
            }
            self.heap.pop();
        }
        None
    }

    /// Pops the next live event if it fires at or before `limit`, advancing
    /// the clock to its fire time.
    pub fn pop_until(&mut self, limit: SimTime) -> Option<SimEvent<E>> {
        let at = self.peek_live()?;
        if at > limit {
            return None;
        }
        let entry = self.heap.pop().expect("peeked entry");
        self.pending.remove(&entry.id);
        debug_assert!(entry.fire_at >= self.now);
        self.now = entry.fire_at;
        self.processed += 1;
        Some(SimEvent {
            id: entry.id,
            fire_at: entry.fire_at,
            seq: entry.seq,
            payload: entry.payload,
        })
    }

    /// Processes every event with `fire_at <= t_end` in order, handing each to
    /// `handler` together with the scheduler so it can schedule follow-ups.
    ///
    /// Leaves the clock at `t_end` when the queue drains earlier.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Self, SimEvent<E>),
    {
        assert!(t_end >= self.now, "run_until({t_end}) before clock {}", self.now);
        let mut count = 0;
        while let Some(ev) = self.pop_until(t_end) {
            handler(self, ev);
            count += 1;
        }
        self.now = t_end;
        count
    }
}

/// Named, independently seeded random stream.
///
/// The stream seed is derived from `(seed, label)` only, so adding a new
/// stream never perturbs the draws of existing ones.
pub struct RngStream {
    seed: u64,
    label: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(label.as_bytes());
        let digest: [u8; 32] = h.finalize().into();
        Self {
            seed,
            label,
            rng: ChaCha8Rng::from_seed(digest),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random::<u64>()
    }
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream")
            .field("seed", &self.seed)
            .field("label", &self.label)
            .finish()
    }
}
