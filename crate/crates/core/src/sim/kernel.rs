use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::model::Duration;

/// Events with equal time run in phase order, then in scheduling order.
/// Arbitration and server decisions use [`Phase::Decide`] so that they see
/// every arrival stamped with the same time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Update = 0,
    Decide = 1,
}

#[derive(Debug)]
struct Entry<E> {
    time: Duration,
    phase: Phase,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
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
        self.key().cmp(&other.key())
    }
}
impl<E> Entry<E> {
    fn key(&self) -> (Duration, Phase, u64) {
        (self.time, self.phase, self.seq)
    }
}

/// Single-queue discrete-event scheduler.
#[derive(Debug)]
pub struct EventQueue<E> {
    heap: BinaryHeap<Reverse<Entry<E>>>,
    seq: u64,
    now: Duration,
    processed: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        EventQueue { heap: BinaryHeap::new(), seq: 0, now: Duration::ZERO, processed: 0 }
    }
}

impl<E> EventQueue<E> {
    pub fn now(&self) -> Duration {
        self.now
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, time: Duration, phase: Phase, event: E) {
        debug_assert!(time >= self.now, "event scheduled in the past");
        self.seq += 1;
        self.heap.push(Reverse(Entry { time, phase, seq: self.seq, event }));
    }

    pub fn peek_time(&self) -> Option<Duration> {
        self.heap.peek().map(|Reverse(e)| e.time)
    }

    pub fn pop(&mut self) -> Option<(Duration, E)> {
        let Reverse(e) = self.heap.pop()?;
        self.now = e.time;
        self.processed += 1;
        Some((e.time, e.event))
    }
}
