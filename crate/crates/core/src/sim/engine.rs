use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cache::Prime;
use super::clock::{cdc_hop, Clock};
use super::kernel::{EventQueue, Phase};
use super::periph::{kidx, kind_of, Generic, Io, Ms, MsConfig, Spm};
use super::scenario::*;
use super::stats::{TraceRecord, TraceStats};
use super::SimError;
use crate::component::MemoryCase;
use crate::model::*;

/// A transaction in flight, with every intermediate timestamp.
#[derive(Clone, Debug)]
pub(crate) struct Txn {
    pub id: u64,
    pub kind: TransactionKind,
    pub beta: u32,
    pub issuer: usize,
    pub target: usize,
    pub addr: u64,
    pub issued: Duration,
    pub accepted: Duration,
    pub arrive_xbar: Duration,
    pub grant: Duration,
    pub bridge_fwd: Duration,
    /// W beats at the crossbar subordinate port and at the peripheral.
    pub w_s: Vec<Duration>,
    pub w_p: Vec<Duration>,
    pub e0: Duration,
    /// R beats leaving the peripheral.
    pub r_beats: Vec<Duration>,
    pub periph_done: Duration,
    pub xbar: Duration,
    pub bridge: Duration,
    pub completed: Option<Duration>,
    pub case: Option<MemoryCase>,
    /// Cache state forced on the touched lines just before the lookup.
    pub prime: Option<Prime>,
}

#[derive(Clone, Copy, Debug)]
enum Ev {
    Issue(usize),
    ArriveXbar(u64),
    Arbitrate(usize, usize),
    PeriphArrive(u64),
    Serve(usize),
    PeriphDone(u64),
    Complete(u64),
}

// Channel indices of a CDC bridge.
const AR: usize = 0;
const AW: usize = 1;
const W: usize = 2;
const R: usize = 3;
const B: usize = 4;

#[derive(Debug)]
enum BridgeSim {
    /// `tx` is the controller side.
    Cdc { tx: Clock, rx: Clock, last: [Option<Duration>; 5] },
    Fixed { d: [Duration; 2] },
}

#[derive(Debug)]
struct Gen {
    mode: Mode,
    count: u64,
    beta: BetaDist,
    kinds: KindMix,
    target: usize,
    pattern: AddressPattern,
    phi: [u32; 2],
    jitter: u32,
    rng: ChaCha8Rng,
    issued: u64,
    done: u64,
    alt: usize,
    slice_base: u64,
    slice_size: u64,
    next_off: u64,
    stopped: bool,
}

#[derive(Debug)]
struct Ctrl {
    id: String,
    clock: Clock,
    bridges: Vec<BridgeSim>,
    gen: Option<Gen>,
    outstanding: [u32; 2],
    w_free: Duration,
    last_issue: Option<Duration>,
    issue_at: Option<Duration>,
    /// Crossbar subordinate port: requests waiting for a grant, per kind.
    pending: [VecDeque<u64>; 2],
    port_writes: u32,
    r_last: Option<Duration>,
}

#[derive(Debug)]
enum Model {
    Spm(Spm),
    Io(Io),
    Ms(Box<Ms>),
    Generic(Generic),
}

#[derive(Debug)]
struct Slot {
    id: String,
    chi: [u32; 2],
    outstanding: [u32; 2],
    max_out: [u32; 2],
    rr: [usize; 2],
    arb_at: [Option<Duration>; 2],
    serve_at: Option<Duration>,
    model: Model,
    region: AddressRange,
}

/// A built simulation: topology instantiated with one scenario and seed.
#[derive(Debug)]
pub struct SimInstance {
    q: EventQueue<Ev>,
    xbar: Clock,
    d_tab: u32,
    ctrls: Vec<Ctrl>,
    slots: Vec<Slot>,
    txns: Vec<Txn>,
    observed: usize,
    started: bool,
}

/// Bytes per cache line for main memories, bytes per AXI word elsewhere.
fn granule(slot: &Slot) -> u64 {
    match &slot.model {
        Model::Ms(ms) => ms.line_bytes(),
        _ => 8,
    }
}

pub fn build_sim(t: &Topology, s: &Scenario, seed: u64) -> Result<SimInstance, SimError> {
    let v = validate_topology(t);
    if !v.ok {
        let msgs: Vec<String> = v.errors().map(|d| d.to_string()).collect();
        return Err(SimError::Topology(msgs.join("; ")));
    }
    check_scenario(t, s)?;

    let mut phase_rng = ChaCha8Rng::seed_from_u64(seed);
    phase_rng.set_stream(0);
    let clocks: BTreeMap<&str, Clock> = t
        .clocks
        .iter()
        .map(|c| {
            let phase = phase_rng.gen_range(0..c.period.as_ps());
            (c.name.as_str(), Clock::new(c.period, phase))
        })
        .collect();
    let xbar = clocks[t.crossbar.clock.as_str()];

    let mut slots = Vec::new();
    for p in &t.peripherals {
        let clk = clocks[p.clock.as_str()];
        let model = match &p.kind {
            PeripheralKind::Spm(_) => Model::Spm(Spm::new(clk)),
            PeripheralKind::IoSubsystem(_) => Model::Io(Io::new(clk)),
            PeripheralKind::Generic(g) => Model::Generic(Generic::new(g.clone())),
            PeripheralKind::MainMemory(m) => Model::Ms(Box::new(Ms::new(MsConfig {
                clk,
                hram: clocks[m.hram_clock.as_str()],
                line_width: m.line_width,
                dw_axi: m.dw_axi,
                word_cycles: (m.dw_axi as u64).div_ceil(m.dw_hyper as u64),
                latency: m.hram_access_latency_cycles,
                sets: m.set_count,
                ways: m.way_count,
            }))),
        };
        let region = *t.region(&p.id).expect("validated topologies map every peripheral");
        slots.push(Slot {
            id: p.id.clone(),
            chi: [p.fifo_depth(TransactionKind::Read), p.fifo_depth(TransactionKind::Write)],
            outstanding: [0; 2],
            max_out: [0; 2],
            rr: [0; 2],
            arb_at: [None; 2],
            serve_at: None,
            model,
            region,
        });
    }

    let n = t.controllers.len() as u64;
    let mut ctrls = Vec::new();
    for (i, c) in t.controllers.iter().enumerate() {
        let bridges = c
            .bridge_path
            .iter()
            .map(|b| match &t.bridge(b).expect("validated").kind {
                BridgeKind::CdcFifo { tx_clock, rx_clock, .. } => BridgeSim::Cdc {
                    tx: clocks[tx_clock.as_str()],
                    rx: clocks[rx_clock.as_str()],
                    last: [None; 5],
                },
                BridgeKind::FixedDelay { d_read, d_write } => BridgeSim::Fixed { d: [*d_read, *d_write] },
            })
            .collect();
        let gen = match s.workload(&c.id) {
            Some(w) if w.mode != Mode::Idle => {
                let target = t.peripheral_index(&w.target).expect("checked");
                let slot = &slots[target];
                let g = granule(slot);
                let slice = (slot.region.size / n) / g * g;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1 + i as u64);
                let phi = match w.outstanding {
                    Some(o) => [o, o],
                    None => [c.phi_read, c.phi_write],
                };
                Some(Gen {
                    mode: w.mode,
                    // Interferers run until the observed controller is done.
                    count: if w.mode == Mode::Interference { u64::MAX } else { w.count },
                    beta: w.beta.clone(),
                    kinds: w.kind,
                    target,
                    pattern: w.pattern,
                    phi,
                    jitter: w.jitter_cycles,
                    rng,
                    issued: 0,
                    done: 0,
                    alt: 0,
                    slice_base: slot.region.base + i as u64 * slice,
                    slice_size: slice,
                    next_off: 0,
                    stopped: false,
                })
            }
            _ => None,
        };
        ctrls.push(Ctrl {
            id: c.id.clone(),
            clock: clocks[c.clock.as_str()],
            bridges,
            gen,
            outstanding: [0; 2],
            w_free: Duration::ZERO,
            last_issue: None,
            issue_at: None,
            pending: Default::default(),
            port_writes: 0,
            r_last: None,
        });
    }

    let observed = t.controller_index(&s.observed).expect("checked");
    let mut sim = SimInstance {
        q: EventQueue::default(),
        xbar,
        d_tab: t.crossbar.d_tab,
        ctrls,
        slots,
        txns: Vec::new(),
        observed,
        started: false,
    };
    sim.preload();
    Ok(sim)
}

fn check_scenario(t: &Topology, s: &Scenario) -> Result<(), SimError> {
    let err = |m: String| Err(SimError::Scenario(m));
    let mut seen = std::collections::HashSet::new();
    for w in &s.workloads {
        if t.controller(&w.controller).is_none() {
            return err(format!("unknown controller `{}`", w.controller));
        }
        if !seen.insert(w.controller.as_str()) {
            return err(format!("controller `{}` has two workloads", w.controller));
        }
        if t.peripheral(&w.target).is_none() {
            return err(format!("unknown target peripheral `{}`", w.target));
        }
        let betas = w.beta.values();
        if betas.is_empty() || betas.iter().any(|&b| !(1..=256).contains(&b)) {
            return err(format!("burst lengths of `{}` must lie in [1, 256]", w.controller));
        }
        if w.outstanding == Some(0) {
            return err(format!("outstanding limit of `{}` must be at least 1", w.controller));
        }
    }
    match s.workload(&s.observed) {
        None => err(format!("observed controller `{}` has no workload", s.observed)),
        Some(w) if matches!(w.mode, Mode::Idle | Mode::Interference) => {
            err(format!("observed controller `{}` must run in isolation or saturation mode", s.observed))
        }
        Some(_) => Ok(()),
    }
}

impl SimInstance {
    pub fn observed(&self) -> &str {
        &self.ctrls[self.observed].id
    }

    /// Warms the footprint of every hit-loop workload into its cache.
    fn preload(&mut self) {
        for c in &self.ctrls {
            let Some(g) = &c.gen else { continue };
            if g.pattern != AddressPattern::HitLoop {
                continue;
            }
            if let Model::Ms(ms) = &mut self.slots[g.target].model {
                let lb = ms.line_bytes();
                for l in 0..hit_loop_bytes(g.slice_size, lb) / lb {
                    ms.cache.prime(g.slice_base / lb + l, Prime::Present);
                }
            }
        }
    }

    /// Caps the transaction count of every non-interfering workload.
    pub fn cap_count(&mut self, max_transactions: u64) {
        for c in &mut self.ctrls {
            if let Some(g) = &mut c.gen {
                if g.mode != Mode::Interference {
                    g.count = g.count.min(max_transactions);
                }
            }
        }
    }

    fn start(&mut self) {
        self.started = true;
        let observed_count = self.observed_count();
        for i in 0..self.ctrls.len() {
            let Some(g) = self.ctrls[i].gen.as_mut() else { continue };
            if g.count == 0 || (g.mode == Mode::Interference && observed_count == 0) {
                g.stopped = true;
                continue;
            }
            let at = self.ctrls[i].clock.at_or_after(Duration::ZERO) + self.jitter(i);
            self.schedule_issue(i, at);
        }
    }

    fn observed_count(&self) -> u64 {
        self.ctrls[self.observed].gen.as_ref().map_or(0, |g| g.count)
    }

    fn jitter(&mut self, c: usize) -> Duration {
        let ctrl = &mut self.ctrls[c];
        let g = ctrl.gen.as_mut().unwrap();
        if g.mode != Mode::Isolation || g.jitter == 0 {
            return Duration::ZERO;
        }
        ctrl.clock.cycles(g.rng.gen_range(0..=g.jitter as u64))
    }

    fn schedule_issue(&mut self, c: usize, at: Duration) {
        let ctrl = &mut self.ctrls[c];
        if ctrl.issue_at.is_some_and(|x| x <= at) {
            return;
        }
        ctrl.issue_at = Some(at);
        self.q.schedule(at, Phase::Update, Ev::Issue(c));
    }

    fn request_arb(&mut self, p: usize, k: usize, at: Duration) {
        let slot = &mut self.slots[p];
        if slot.arb_at[k].is_some_and(|x| x <= at) {
            return;
        }
        slot.arb_at[k] = Some(at);
        self.q.schedule(at, Phase::Decide, Ev::Arbitrate(p, k));
    }

    fn request_serve(&mut self, p: usize, at: Duration) {
        let slot = &mut self.slots[p];
        if slot.serve_at.is_some_and(|x| x <= at) {
            return;
        }
        slot.serve_at = Some(at);
        self.q.schedule(at, Phase::Decide, Ev::Serve(p));
    }

    /// Processes events until none remain or the next one lies past `horizon`.
    pub fn run(&mut self, horizon: Option<Duration>) -> Result<TraceStats, SimError> {
        if !self.started {
            self.start();
        }
        while let Some(t) = self.q.peek_time() {
            if horizon.is_some_and(|h| t > h) {
                break;
            }
            let (now, ev) = self.q.pop().unwrap();
            self.handle(now, ev);
        }
        let stats = self.stats();
        let unfinished = self.txns.iter().any(|t| t.completed.is_none())
            || self.ctrls.iter().filter_map(|c| c.gen.as_ref()).any(|g| !g.stopped && g.mode != Mode::Interference && g.issued < g.count)
            || !self.q.is_empty();
        if unfinished {
            return Err(SimError::Horizon(Box::new(stats)));
        }
        Ok(stats)
    }

    fn stats(&self) -> TraceStats {
        let records = self
            .txns
            .iter()
            .filter_map(|t| {
                let completed = t.completed?;
                Some(TraceRecord {
                    id: t.id,
                    kind: t.kind,
                    beta: t.beta,
                    issuer: self.ctrls[t.issuer].id.clone(),
                    target: self.slots[t.target].id.clone(),
                    addr: t.addr,
                    issued: t.issued,
                    accepted: t.accepted,
                    completed,
                    xbar: t.xbar,
                    bridge: t.bridge,
                    periph_accept: t.e0,
                    periph_done: t.periph_done,
                    mem_case: t.case,
                })
            })
            .collect();
        let outstanding = self.slots.iter().map(|s| (s.id.clone(), s.max_out)).collect();
        TraceStats::new(records, outstanding, self.q.processed())
    }

    fn handle(&mut self, now: Duration, ev: Ev) {
        match ev {
            Ev::Issue(c) => self.on_issue(c, now),
            Ev::ArriveXbar(id) => self.on_arrive_xbar(id, now),
            Ev::Arbitrate(p, k) => self.on_arbitrate(p, k, now),
            Ev::PeriphArrive(id) => self.on_periph_arrive(id, now),
            Ev::Serve(p) => self.on_serve(p, now),
            Ev::PeriphDone(id) => self.on_periph_done(id, now),
            Ev::Complete(id) => self.on_complete(id, now),
        }
    }
}

/// Footprint of a hit-loop workload: large enough for the longest burst,
/// small enough to stay resident next to other controllers' footprints.
fn hit_loop_bytes(slice: u64, line_bytes: u64) -> u64 {
    (64 * line_bytes).min(slice / line_bytes * line_bytes).max(line_bytes)
}

impl SimInstance {
    fn pick_kind(&mut self, c: usize) -> Option<TransactionKind> {
        let ctrl = &mut self.ctrls[c];
        let g = ctrl.gen.as_mut().unwrap();
        let free = |k: usize| g.mode == Mode::Isolation || ctrl.outstanding[k] < g.phi[k];
        let first = match g.kinds {
            KindMix::Read => return free(0).then_some(TransactionKind::Read),
            KindMix::Write => return free(1).then_some(TransactionKind::Write),
            KindMix::Alternate => g.alt,
            KindMix::Random => g.rng.gen_range(0..2),
        };
        let k = [first, 1 - first].into_iter().find(|&k| free(k))?;
        g.alt = 1 - k;
        Some(kind_of(k))
    }

    fn next_addr(&mut self, c: usize, beta: u32) -> u64 {
        let g = self.ctrls[c].gen.as_mut().unwrap();
        let slot = &self.slots[g.target];
        let bytes = beta as u64 * 8;
        let lb = granule(slot);
        let step = bytes.div_ceil(lb) * lb;
        let limit = match g.pattern {
            AddressPattern::HitLoop => hit_loop_bytes(g.slice_size, lb),
            _ => g.slice_size,
        };
        if g.next_off + step > limit {
            g.next_off = 0;
        }
        let addr = g.slice_base + g.next_off;
        g.next_off += step;
        addr
    }

    fn on_issue(&mut self, c: usize, now: Duration) {
        if self.ctrls[c].issue_at != Some(now) {
            return;
        }
        self.ctrls[c].issue_at = None;
        {
            let g = self.ctrls[c].gen.as_ref().unwrap();
            if g.stopped || g.issued >= g.count {
                return;
            }
            if g.mode == Mode::Isolation && self.ctrls[c].outstanding.iter().sum::<u32>() > 0 {
                return;
            }
        }
        let Some(kind) = self.pick_kind(c) else { return };
        let (mut beta, target) = {
            let g = self.ctrls[c].gen.as_mut().unwrap();
            let vals = g.beta.values();
            let b = if vals.len() == 1 { vals[0] } else { vals[g.rng.gen_range(0..vals.len())] };
            (b, g.target)
        };
        if matches!(self.slots[target].model, Model::Io(_)) {
            beta = 1;
        }
        let addr = self.next_addr(c, beta);
        let prime = match (&self.slots[target].model, self.ctrls[c].gen.as_ref().unwrap().pattern) {
            (Model::Ms(_), AddressPattern::ColdMiss) => Some(Prime::AbsentCleanVictim),
            (Model::Ms(_), AddressPattern::ConflictEvict) => Some(Prime::AbsentDirtyVictim),
            _ => None,
        };
        let id = self.txns.len() as u64;
        let k = kidx(kind);

        let xbar = self.xbar;
        let ctrl = &mut self.ctrls[c];
        let tc = ctrl.clock.period();
        let mut w: Vec<Duration> = Vec::new();
        if kind == TransactionKind::Write {
            let first = now.max(ctrl.w_free);
            w = (0..beta as u64).map(|i| first + i * tc).collect();
            ctrl.w_free = *w.last().unwrap() + tc;
        }
        let mut x = now;
        for b in &mut ctrl.bridges {
            match b {
                BridgeSim::Cdc { tx, rx, last } => {
                    x = cdc_hop(tx, rx, x, &mut last[if k == 0 { AR } else { AW }]);
                    for beat in &mut w {
                        *beat = cdc_hop(tx, rx, *beat, &mut last[W]);
                    }
                }
                BridgeSim::Fixed { d } => {
                    let out = xbar.at_or_before(x + d[k]).unwrap_or(x).max(x);
                    let shift = out - x;
                    x = out;
                    for beat in &mut w {
                        *beat += shift;
                    }
                }
            }
        }
        ctrl.outstanding[k] += 1;
        ctrl.last_issue = Some(now);
        let g = ctrl.gen.as_mut().unwrap();
        g.issued += 1;
        let (mode, more) = (g.mode, g.issued < g.count);
        self.txns.push(Txn {
            id,
            kind,
            beta,
            issuer: c,
            target,
            addr,
            issued: now,
            accepted: now,
            arrive_xbar: x,
            grant: x,
            bridge_fwd: x - now,
            w_s: w,
            w_p: Vec::new(),
            e0: x,
            r_beats: Vec::new(),
            periph_done: x,
            xbar: Duration::ZERO,
            bridge: Duration::ZERO,
            completed: None,
            case: None,
            prime,
        });
        self.q.schedule(x, Phase::Update, Ev::ArriveXbar(id));
        if mode != Mode::Isolation && more {
            self.schedule_issue(c, now + tc);
        }
    }

    fn on_arrive_xbar(&mut self, id: u64, now: Duration) {
        let t = &self.txns[id as usize];
        let (c, k, p) = (t.issuer, kidx(t.kind), t.target);
        self.ctrls[c].pending[k].push_back(id);
        let at = self.xbar.at_or_after(now);
        self.request_arb(p, k, at);
    }

    fn on_arbitrate(&mut self, p: usize, k: usize, now: Duration) {
        if self.slots[p].arb_at[k] != Some(now) {
            return;
        }
        self.slots[p].arb_at[k] = None;
        let n = self.ctrls.len();
        let heads = |s: &Self, i: usize| s.ctrls[i].pending[k].front().is_some_and(|&id| s.txns[id as usize].target == p);
        if self.slots[p].outstanding[k] >= self.slots[p].chi[k] {
            return;
        }
        let start = self.slots[p].rr[k];
        let winner = (0..n)
            .map(|s| (start + s) % n)
            .find(|&i| heads(self, i) && (k == 0 || self.ctrls[i].port_writes < self.d_tab));
        if let Some(i) = winner {
            let id = self.ctrls[i].pending[k].pop_front().unwrap();
            self.slots[p].rr[k] = (i + 1) % n;
            self.grant(id, now);
        }
        if (0..n).any(|i| heads(self, i)) {
            let t = self.xbar.period();
            self.request_arb(p, k, now + t);
        }
    }

    fn grant(&mut self, id: u64, g: Duration) {
        let t = self.xbar.period();
        let txn = &mut self.txns[id as usize];
        let (c, k, p) = (txn.issuer, kidx(txn.kind), txn.target);
        txn.grant = g;
        if self.ctrls[c].bridges.is_empty() {
            txn.accepted = g;
        }
        txn.e0 = g + t;
        let mut prev: Option<Duration> = None;
        txn.w_p = txn
            .w_s
            .iter()
            .map(|&w| {
                let mut at = w.max(g) + t;
                if let Some(p) = prev {
                    at = at.max(p + t);
                }
                prev = Some(at);
                at
            })
            .collect();
        let e0 = txn.e0;
        let slot = &mut self.slots[p];
        slot.outstanding[k] += 1;
        slot.max_out[k] = slot.max_out[k].max(slot.outstanding[k]);
        if k == 1 {
            self.ctrls[c].port_writes += 1;
        }
        self.q.schedule(e0, Phase::Update, Ev::PeriphArrive(id));
    }

    fn on_periph_arrive(&mut self, id: u64, _now: Duration) {
        let p = self.txns[id as usize].target;
        let txn = &mut self.txns[id as usize];
        match &mut self.slots[p].model {
            Model::Spm(m) => {
                let done = m.arrive(txn);
                self.q.schedule(done, Phase::Update, Ev::PeriphDone(id));
            }
            Model::Generic(m) => {
                let done = m.arrive(txn);
                self.q.schedule(done, Phase::Update, Ev::PeriphDone(id));
            }
            Model::Io(m) => {
                let at = m.arrive(txn);
                self.request_serve(p, at);
            }
            Model::Ms(m) => {
                let at = m.arrive(txn);
                self.request_serve(p, at);
            }
        }
    }

    fn on_serve(&mut self, p: usize, now: Duration) {
        if self.slots[p].serve_at != Some(now) {
            return;
        }
        self.slots[p].serve_at = None;
        let (started, next) = match &mut self.slots[p].model {
            Model::Io(m) => {
                let (s, n) = m.serve(now, &self.txns);
                (s.into_iter().collect::<Vec<_>>(), n)
            }
            Model::Ms(m) => m.serve(now, &mut self.txns),
            _ => unreachable!("only queued peripherals are served"),
        };
        for (id, done) in started {
            self.q.schedule(done, Phase::Update, Ev::PeriphDone(id));
        }
        if let Some(n) = next {
            self.request_serve(p, n.max(now));
        }
    }

    fn on_periph_done(&mut self, id: u64, now: Duration) {
        let t = self.xbar.period();
        let (c, k, p) = {
            let txn = &mut self.txns[id as usize];
            txn.periph_done = now;
            (txn.issuer, kidx(txn.kind), txn.target)
        };
        self.slots[p].outstanding[k] -= 1;
        if k == 1 {
            self.ctrls[c].port_writes -= 1;
        }
        let at = self.xbar.at_or_after(now);
        self.request_arb(p, k, at);
        if k == 1 {
            for q in 0..self.slots.len() {
                if q != p {
                    self.request_arb(q, 1, at);
                }
            }
        }

        // Response through the crossbar, then back across the bridges.
        let ctrl = &mut self.ctrls[c];
        let txn = &mut self.txns[id as usize];
        let mut beats: Vec<Duration> = if k == 0 {
            let mut out = Vec::with_capacity(txn.r_beats.len());
            // The IO block returns its single word together with completion.
            let beats = if txn.r_beats.is_empty() { vec![now] } else { txn.r_beats.clone() };
            for r in beats {
                let mut at = r + t;
                if let Some(l) = ctrl.r_last {
                    at = at.max(l + t);
                }
                ctrl.r_last = Some(at);
                out.push(at);
            }
            out
        } else {
            vec![now + t]
        };
        let resp_out = *beats.last().unwrap();
        txn.xbar = (txn.grant - txn.arrive_xbar) + t + (resp_out - now);
        for b in ctrl.bridges.iter_mut().rev() {
            if let BridgeSim::Cdc { tx, rx, last } = b {
                for beat in &mut beats {
                    *beat = cdc_hop(rx, tx, *beat, &mut last[if k == 0 { R } else { B }]);
                }
            }
        }
        let completed = *beats.last().unwrap();
        txn.bridge = txn.bridge_fwd + (completed - resp_out);
        self.q.schedule(completed, Phase::Update, Ev::Complete(id));
    }

    fn on_complete(&mut self, id: u64, now: Duration) {
        let (c, k) = {
            let txn = &mut self.txns[id as usize];
            txn.completed = Some(now);
            (txn.issuer, kidx(txn.kind))
        };
        self.ctrls[c].outstanding[k] -= 1;
        let g = self.ctrls[c].gen.as_mut().unwrap();
        g.done += 1;
        let (mode, issued, count, done) = (g.mode, g.issued, g.count, g.done);
        if c == self.observed && done >= count {
            for o in &mut self.ctrls {
                if let Some(g) = &mut o.gen {
                    if g.mode == Mode::Interference {
                        g.stopped = true;
                    }
                }
            }
        }
        if issued >= count || self.ctrls[c].gen.as_ref().unwrap().stopped {
            return;
        }
        let ctrl = &self.ctrls[c];
        let mut at = ctrl.clock.at_or_after(now);
        if mode == Mode::Isolation {
            at += self.jitter(c);
        } else if let Some(l) = ctrl.last_issue {
            at = at.max(l + ctrl.clock.period());
        }
        self.schedule_issue(c, at);
    }
}
