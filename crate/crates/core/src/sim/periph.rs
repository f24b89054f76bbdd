//! Behavioral timing of the subordinate IPs. Times are relative to the
//! request's arrival at the peripheral (`e0`); every model returns the
//! instant its last output (final R beat or B) leaves the peripheral.

use std::collections::VecDeque;

use super::cache::{Cache, Lookup};
use super::clock::{cdc_hop, Clock};
use super::engine::Txn;
use crate::component::MemoryCase;
use crate::model::{Duration, PeripheralTimingModel, TransactionKind};

pub(crate) fn kidx(kind: TransactionKind) -> usize {
    match kind {
        TransactionKind::Read => 0,
        TransactionKind::Write => 1,
    }
}

pub(crate) fn kind_of(i: usize) -> TransactionKind {
    if i == 0 {
        TransactionKind::Read
    } else {
        TransactionKind::Write
    }
}

/// Scratchpad: 4-cycle converter plus demux in front of dual-ported banks.
/// Reads and writes use separate, fully pipelined paths.
#[derive(Debug)]
pub(crate) struct Spm {
    pub clk: Clock,
    port_free: [Duration; 2],
}

impl Spm {
    pub fn new(clk: Clock) -> Self {
        Spm { clk, port_free: [Duration::ZERO; 2] }
    }

    pub fn arrive(&mut self, t: &mut Txn) -> Duration {
        let c = self.clk.period();
        match t.kind {
            TransactionKind::Read => {
                let first = (t.e0 + 5 * c).max(self.port_free[0]);
                t.r_beats = (0..t.beta as u64).map(|k| first + k * c).collect();
                let last = *t.r_beats.last().unwrap();
                self.port_free[0] = last + c;
                last
            }
            TransactionKind::Write => {
                let mut prev = self.port_free[1].saturating_sub(c);
                let mut last = Duration::ZERO;
                for k in 1..=t.beta as u64 {
                    let at = (t.e0 + (2 + k) * c).max(t.w_p[k as usize - 1]).max(prev + c);
                    prev = at;
                    last = at;
                }
                self.port_free[1] = last + c;
                last + c
            }
        }
    }
}

/// Non-pipelined IO subsystem: one server alternating between the read and
/// write queues, single-word transfers only.
#[derive(Debug)]
pub(crate) struct Io {
    pub clk: Clock,
    queues: [VecDeque<u64>; 2],
    busy_until: Duration,
    rr: usize,
}

impl Io {
    pub fn new(clk: Clock) -> Self {
        Io { clk, queues: Default::default(), busy_until: Duration::ZERO, rr: 0 }
    }

    pub fn arrive(&mut self, t: &Txn) -> Duration {
        self.queues[kidx(t.kind)].push_back(t.id);
        self.clk.at_or_after((t.e0 + self.clk.period()).max(self.busy_until))
    }

    /// Starts at most one transaction at `now`; returns it and when to look again.
    pub fn serve(&mut self, now: Duration, txns: &[Txn]) -> (Option<(u64, Duration)>, Option<Duration>) {
        let c = self.clk.period();
        let ready = |q: &VecDeque<u64>| q.front().map(|&id| txns[id as usize].e0 + c);
        if self.busy_until > now {
            return (None, Some(self.busy_until));
        }
        let pick = [self.rr, 1 - self.rr].into_iter().find(|&k| ready(&self.queues[k]).is_some_and(|r| r <= now));
        let mut started = None;
        if let Some(k) = pick {
            let id = self.queues[k].pop_front().unwrap();
            let t = &txns[id as usize];
            let done = match t.kind {
                TransactionKind::Read => now + 3 * c,
                TransactionKind::Write => (now + 2 * c).max(t.w_p[0] + c),
            };
            self.busy_until = done;
            self.rr = 1 - k;
            started = Some((id, done));
        }
        let next = self.queues.iter().filter_map(ready).min().map(|r| self.clk.at_or_after(r.max(self.busy_until).max(now)));
        let next = next.map(|n| if n == now && started.is_none() { now + c } else { n });
        (started, next)
    }
}

/// Peripheral defined directly by its timing tuple.
#[derive(Debug)]
pub(crate) struct Generic {
    tm: PeripheralTimingModel,
    free: [Duration; 2],
}

impl Generic {
    pub fn new(tm: PeripheralTimingModel) -> Self {
        Generic { tm, free: [Duration::ZERO; 2] }
    }

    pub fn arrive(&mut self, t: &mut Txn) -> Duration {
        let slot = if self.tm.theta == 1 { kidx(t.kind) } else { 0 };
        let data = self.tm.t_data.for_beats(t.beta as u64);
        let ctrl = self.tm.t_ctrl(t.kind);
        let mut done = if self.tm.rho == 1 {
            (t.e0 + ctrl).max(self.free[slot]) + data
        } else {
            t.e0.max(self.free[slot]) + ctrl + data
        };
        if let Some(&w) = t.w_p.last() {
            done = done.max(w + self.tm.t_data.for_beats(1));
        }
        self.free[slot] = done;
        if t.kind == TransactionKind::Read {
            let step = Duration::from_ps(self.tm.t_data.ratio().to_integer());
            t.r_beats = (0..t.beta as u64).rev().map(|k| done.saturating_sub(k * step)).collect();
        }
        done
    }
}

/// Last-level cache in front of the HyperRAM controller and memory.
#[derive(Debug)]
pub(crate) struct Ms {
    pub clk: Clock,
    hram: Clock,
    line_width: u32,
    word_bytes: u64,
    /// HyperRAM cycles per AXI word.
    word_cycles: u64,
    latency: u64,
    pub cache: Cache,
    queues: [VecDeque<u64>; 2],
    last_dispatch: [Option<Duration>; 2],
    port_free: [Duration; 2],
    miss_free: Duration,
    miss_rr: usize,
    ser_free: Duration,
    backend_free: Duration,
    fwd_last: Option<Duration>,
    back_last: Option<Duration>,
}

pub(crate) struct MsConfig {
    pub clk: Clock,
    pub hram: Clock,
    pub line_width: u32,
    pub dw_axi: u32,
    pub word_cycles: u64,
    pub latency: u32,
    pub sets: u32,
    pub ways: u32,
}

impl Ms {
    pub fn new(cfg: MsConfig) -> Self {
        Ms {
            clk: cfg.clk,
            hram: cfg.hram,
            line_width: cfg.line_width,
            word_bytes: (cfg.dw_axi / 8) as u64,
            word_cycles: cfg.word_cycles,
            latency: cfg.latency as u64,
            cache: Cache::new(cfg.sets, cfg.ways),
            queues: Default::default(),
            last_dispatch: [None; 2],
            port_free: [Duration::ZERO; 2],
            miss_free: Duration::ZERO,
            miss_rr: 0,
            ser_free: Duration::ZERO,
            backend_free: Duration::ZERO,
            fwd_last: None,
            back_last: None,
        }
    }

    pub fn line_bytes(&self) -> u64 {
        self.line_width as u64 * self.word_bytes
    }

    /// Cache lines touched by a burst.
    pub fn lines(&self, addr: u64, beta: u32) -> std::ops::Range<u64> {
        let first = addr / self.line_bytes();
        let end = (addr + beta as u64 * self.word_bytes).div_ceil(self.line_bytes());
        first..end.max(first + 1)
    }

    pub fn arrive(&mut self, t: &Txn) -> Duration {
        self.queues[kidx(t.kind)].push_back(t.id);
        t.e0
    }

    fn ready_at(&self, k: usize, txns: &[Txn]) -> Option<Duration> {
        let id = *self.queues[k].front()?;
        let e0 = txns[id as usize].e0;
        Some(match self.last_dispatch[k] {
            Some(d) => e0.max(d + self.clk.period()),
            None => e0,
        })
    }

    /// Dispatches every queue head that can go at `now`.
    pub fn serve(&mut self, now: Duration, txns: &mut [Txn]) -> (Vec<(u64, Duration)>, Option<Duration>) {
        let mut started = Vec::new();
        let mut next: Option<Duration> = None;
        let mut later = |t: Duration| next = Some(next.map_or(t, |n: Duration| n.min(t)));
        for k in [self.miss_rr, 1 - self.miss_rr] {
            let Some(ready) = self.ready_at(k, txns) else { continue };
            if ready > now {
                later(ready);
                continue;
            }
            let id = *self.queues[k].front().unwrap();
            let (addr, beta) = (txns[id as usize].addr, txns[id as usize].beta);
            // Forced cases are applied at the lookup so no other access can undo them.
            if let Some(p) = txns[id as usize].prime {
                for l in self.lines(addr, beta) {
                    self.cache.prime(l, p);
                }
            }
            let hit = self.lines(addr, beta).all(|l| self.cache.contains(l));
            if !hit && self.miss_free > now {
                later(self.miss_free);
                continue;
            }
            self.queues[k].pop_front();
            self.last_dispatch[k] = Some(now);
            let t = &mut txns[id as usize];
            let done = if hit { self.hit(t, now) } else { self.miss(t, now) };
            if !hit {
                self.miss_free = done;
                self.miss_rr = 1 - k;
            }
            started.push((id, done));
            if !self.queues[k].is_empty() {
                later(now + self.clk.period());
            }
        }
        (started, next)
    }

    fn hit(&mut self, t: &mut Txn, d: Duration) -> Duration {
        let write = t.kind == TransactionKind::Write;
        for l in self.lines(t.addr, t.beta) {
            self.cache.access(l, write);
        }
        t.case = Some(MemoryCase::Hit);
        let c = self.clk.period();
        match t.kind {
            TransactionKind::Read => {
                let first = (d + 6 * c).max(self.port_free[0]);
                t.r_beats = (0..t.beta as u64).map(|k| first + k * c).collect();
                let last = *t.r_beats.last().unwrap();
                self.port_free[0] = last + c;
                last
            }
            TransactionKind::Write => {
                let mut prev = self.port_free[1].saturating_sub(c);
                for k in 1..=t.beta as u64 {
                    prev = (d + (4 + k) * c).max(t.w_p[k as usize - 1]).max(prev + c);
                }
                self.port_free[1] = prev + c;
                prev + c
            }
        }
    }

    /// Back-end slot for one line: command, access latency, data words.
    fn slot(&self) -> Duration {
        self.hram.cycles(1 + 3 + self.latency + self.line_width as u64 * self.word_cycles)
    }

    fn miss(&mut self, t: &mut Txn, d: Duration) -> Duration {
        let c = self.clk.period();
        let write = t.kind == TransactionKind::Write;
        let lines: Vec<u64> = self.lines(t.addr, t.beta).collect();
        let lookups: Vec<Lookup> = lines.iter().map(|&l| self.cache.access(l, write)).collect();
        t.case = Some(if lookups.iter().any(|l| matches!(l, Lookup::Miss { victim_dirty: Some(true) })) {
            MemoryCase::MissRefillEvict
        } else {
            MemoryCase::MissRefill
        });

        let first_word = ((t.addr % self.line_bytes()) / self.word_bytes) as u32;
        let mut word = 0u32;
        let mut refill_done = d;
        let mut prev_beat: Option<Duration> = None;
        let lw = self.line_width;
        for (j, lookup) in lookups.iter().enumerate() {
            let t_req = if j == 0 { d + 4 * c } else { refill_done + c };
            refill_done = match lookup {
                Lookup::Hit => t_req,
                Lookup::Miss { victim_dirty } => self.refill(t_req, *victim_dirty == Some(true)),
            };
            let span = if j == 0 { lw - first_word } else { lw };
            let words = span.min(t.beta - word);
            for _ in 0..words {
                let k = word as usize;
                let at = match t.kind {
                    TransactionKind::Read => refill_done + 3 * c,
                    TransactionKind::Write => (refill_done + 2 * c).max(t.w_p[k]),
                };
                let at = match prev_beat {
                    Some(p) => at.max(p + c),
                    None => at.max(self.port_free[kidx(t.kind)]),
                };
                if t.kind == TransactionKind::Read {
                    t.r_beats.push(at);
                }
                prev_beat = Some(at);
                word += 1;
            }
        }
        let last = prev_beat.expect("burst has at least one beat");
        self.port_free[kidx(t.kind)] = last + c;
        match t.kind {
            TransactionKind::Read => last,
            TransactionKind::Write => last + c,
        }
    }

    /// One line fetched from HyperRAM, optionally preceded by a write-back.
    /// Returns when the line is available to the LLC.
    fn refill(&mut self, t_req: Duration, evict: bool) -> Duration {
        let c = self.clk.period();
        let mut fe = (t_req + c).max(self.ser_free);
        if evict {
            let fe_w = fe + 3 * c;
            let arrive = cdc_hop(&self.clk, &self.hram, fe_w, &mut self.fwd_last);
            self.backend_free = arrive.max(self.backend_free) + self.slot();
            fe = fe_w;
        }
        let fe_r = fe + 3 * c;
        self.ser_free = fe_r;
        let arrive = cdc_hop(&self.clk, &self.hram, fe_r, &mut self.fwd_last);
        let start = arrive.max(self.backend_free);
        self.backend_free = start + self.slot();
        let mut last = start;
        for i in 0..self.line_width as u64 {
            let ready = start + self.hram.cycles(1 + 3 + self.latency + (i + 1) * self.word_cycles);
            let back = cdc_hop(&self.hram, &self.clk, ready + self.hram.period(), &mut self.back_last);
            last = back + c;
        }
        last + c
    }
}
