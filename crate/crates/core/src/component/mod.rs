//! Closed-form worst-case delays of the individual IPs.
//!
//! Every function is pure and homogeneous in the clock periods it is given.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComponentError {
    #[error("HyperRAM access latency {0} outside [7, 16] cycles")]
    HramLatency(u32),
    #[error("crossbar contender count must be at least 1, got {0}")]
    ContenderCount(u32),
    #[error("burst length must be at least 1")]
    ZeroBeta,
    #[error("peripheral `{0}` is a main memory and needs a memory case")]
    MemoryCaseMissing(String),
    #[error("peripheral `{0}` is not a main memory; a memory case does not apply")]
    MemoryCaseSuperfluous(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A bound together with the additive terms it is made of.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BoundBreakdown {
    pub total: Duration,
    pub terms: Vec<(String, Duration)>,
}

impl BoundBreakdown {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: impl Into<String>, d: Duration) {
        self.total += d;
        self.terms.push((label.into(), d));
    }

    pub fn with(mut self, label: impl Into<String>, d: Duration) -> Self {
        self.push(label, d);
        self
    }

    /// Appends every term of `other`, labels prefixed with `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: BoundBreakdown) {
        for (l, d) in other.terms {
            self.push(format!("{prefix}/{l}"), d);
        }
    }

    pub fn term(&self, label: &str) -> Option<Duration> {
        self.terms.iter().find(|(l, _)| l == label).map(|(_, d)| *d)
    }
}

impl fmt::Display for BoundBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.total)?;
        let parts: Vec<String> = self.terms.iter().map(|(l, d)| format!("{l}={}", d.as_ps())).collect();
        if !parts.is_empty() {
            write!(f, " [{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryCase {
    Hit,
    MissRefill,
    MissRefillEvict,
}

impl MemoryCase {
    pub const ALL: [MemoryCase; 3] = [MemoryCase::Hit, MemoryCase::MissRefill, MemoryCase::MissRefillEvict];

    pub fn as_str(self) -> &'static str {
        match self {
            MemoryCase::Hit => "hit",
            MemoryCase::MissRefill => "miss_refill",
            MemoryCase::MissRefillEvict => "miss_refill_evict",
        }
    }
}

impl fmt::Display for MemoryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MemoryCase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "hit" => Ok(MemoryCase::Hit),
            "miss_refill" | "miss" | "refill" => Ok(MemoryCase::MissRefill),
            "miss_refill_evict" | "evict" => Ok(MemoryCase::MissRefillEvict),
            other => Err(format!("unknown memory case `{other}`")),
        }
    }
}

// ---- bridges ----

/// One FIFO crossing: a tx edge to write, four rx edges to synchronize and read.
pub fn cdc_hop_delay(tx: &ClockDomain, rx: &ClockDomain) -> Duration {
    tx.period + 4 * rx.period
}

/// Request hop plus response hop; the same for both kinds.
pub fn cdc_transaction_delay(ctrl: &ClockDomain, periph: &ClockDomain, _kind: TransactionKind) -> BoundBreakdown {
    BoundBreakdown::new()
        .with("request hop", cdc_hop_delay(ctrl, periph))
        .with("response hop", cdc_hop_delay(periph, ctrl))
}

// ---- SPM and IO ----

pub fn spm_timing(fifo_depth: u32, clock: &ClockDomain) -> PeripheralTimingModel {
    PeripheralTimingModel {
        chi_read: fifo_depth,
        chi_write: fifo_depth,
        rho: 1,
        theta: 1,
        t_ctrl_read: clock.cycles(6),
        t_ctrl_write: clock.cycles(5),
        t_data: WordTime::from_duration(clock.period),
    }
}

/// IO subsystem timing. The IO path is single-word; callers clamp β to 1.
pub fn io_timing(fifo_depth: u32, clock: &ClockDomain) -> PeripheralTimingModel {
    PeripheralTimingModel {
        chi_read: fifo_depth,
        chi_write: fifo_depth,
        rho: 0,
        theta: 0,
        t_ctrl_read: clock.cycles(4),
        t_ctrl_write: clock.cycles(3),
        t_data: WordTime::from_duration(clock.period),
    }
}

// ---- main memory ----

pub fn llc_hit_ctrl(llc: &ClockDomain) -> Duration {
    llc.cycles(6)
}

pub fn llc_hit_data(llc: &ClockDomain) -> Duration {
    llc.cycles(1)
}

/// Hit control time plus the two extra cycles spent detecting the miss.
pub fn llc_miss_ctrl(llc: &ClockDomain) -> Duration {
    llc_hit_ctrl(llc) + llc.cycles(2)
}

pub fn hmc_ctrl(kind: TransactionKind, hmc: &ClockDomain, hram: &ClockDomain) -> BoundBreakdown {
    let mut b = BoundBreakdown::new()
        .with("front-end", hmc.cycles(5))
        .with("cdc to back-end", cdc_hop_delay(hmc, hram));
    if kind == TransactionKind::Read {
        b.push("cdc from back-end", cdc_hop_delay(hram, hmc));
    }
    b.with("back-end", hram.cycles(2))
}

/// Command (3 cycles) plus the fixed initial access latency.
pub fn hram_ctrl(hram: &ClockDomain, access_latency_cycles: u32) -> Result<Duration, ComponentError> {
    if !(7..=16).contains(&access_latency_cycles) {
        return Err(ComponentError::HramLatency(access_latency_cycles));
    }
    Ok(hram.cycles(3 + access_latency_cycles as u64))
}

/// Time to move one AXI word over the HyperBUS.
pub fn hram_word_time(dw_axi: u32, dw_hyper: u32, hram: &ClockDomain, mode: HramDataMode) -> Duration {
    let ratio = (dw_axi as u64).div_ceil(dw_hyper as u64);
    match mode {
        HramDataMode::PhysicalCeil => hram.cycles(ratio),
        HramDataMode::Literal => hram.cycles(dw_hyper as u64 * ratio),
    }
}

/// Main-memory parameters with clock references resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MainMemoryTiming {
    pub llc: ClockDomain,
    pub hmc: ClockDomain,
    pub hram: ClockDomain,
    pub line_width: u32,
    pub llc_fifo_depth: u32,
    pub dw_axi: u32,
    pub dw_hyper: u32,
    pub hram_access_latency_cycles: u32,
    pub mode: HramDataMode,
}

impl MainMemoryTiming {
    pub fn resolve(t: &Topology, m: &MainMemoryParams, mode: HramDataMode) -> Result<Self, ModelError> {
        Ok(MainMemoryTiming {
            llc: t.require_clock(&m.llc_clock)?.clone(),
            hmc: t.require_clock(&m.hmc_clock)?.clone(),
            hram: t.require_clock(&m.hram_clock)?.clone(),
            line_width: m.line_width,
            llc_fifo_depth: m.llc_fifo_depth,
            dw_axi: m.dw_axi,
            dw_hyper: m.dw_hyper,
            hram_access_latency_cycles: m.hram_access_latency_cycles,
            mode,
        })
    }

    pub fn word_time(&self) -> Duration {
        hram_word_time(self.dw_axi, self.dw_hyper, &self.hram, self.mode)
    }

    /// Number of line-sized sub-requests a `beta`-word burst is split into.
    pub fn split_count(&self, beta: u32) -> u64 {
        (beta as u64).div_ceil(self.line_width as u64)
    }
}

/// Control time and exact per-word data time of a miss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MissBound {
    pub t_ctrl: Duration,
    pub t_data: WordTime,
}

impl MissBound {
    pub fn service(&self, beta: u32) -> Duration {
        self.t_ctrl + self.t_data.for_beats(beta as u64)
    }
}

pub fn ms_miss_bound(beta: u32, with_evict: bool, p: &MainMemoryTiming) -> Result<MissBound, ComponentError> {
    if beta == 0 {
        return Err(ComponentError::ZeroBeta);
    }
    let n = p.split_count(beta);
    let hram = hram_ctrl(&p.hram, p.hram_access_latency_cycles)?;
    let hmc_r = hmc_ctrl(TransactionKind::Read, &p.hmc, &p.hram).total;
    let hmc_w = hmc_ctrl(TransactionKind::Write, &p.hmc, &p.hram).total;

    // (LW/β)·⌈β/LW⌉ words of back-end transfer per requested word, kept exact.
    let line_share = Ratio::new(p.line_width as u64 * n, beta as u64) * p.word_time().as_ps();
    let mut t_ctrl = llc_miss_ctrl(&p.llc) + n * (hmc_r + hram);
    let mut t_data = Ratio::from_integer(llc_hit_data(&p.llc).as_ps()) + line_share;
    if with_evict {
        t_ctrl += n * (hmc_w + hram);
        t_data += line_share;
    }
    Ok(MissBound { t_ctrl, t_data: WordTime::from_ratio(t_data) })
}

// ---- crossbar ----

/// Propagation (one cycle each way) plus losing round-robin to `m - 1` contenders.
pub fn xbar_delay(_kind: TransactionKind, m: u32, xbar: &ClockDomain) -> Result<BoundBreakdown, ComponentError> {
    if m < 1 {
        return Err(ComponentError::ContenderCount(m));
    }
    Ok(BoundBreakdown::new()
        .with("propagation", xbar.cycles(2))
        .with("contention", xbar.cycles(m as u64 - 1)))
}

// ---- specialization ----

/// Burst length as seen by the peripheral: the IO path only moves single words.
pub fn effective_beta(p: &PeripheralModel, beta: u32) -> u32 {
    match p.kind {
        PeripheralKind::IoSubsystem(_) => 1,
        _ => beta,
    }
}

/// Instantiates the generic timing tuple for `p` at burst length `beta`.
pub fn specialize_peripheral(
    t: &Topology,
    p: &PeripheralModel,
    beta: u32,
    case: Option<MemoryCase>,
    mode: HramDataMode,
) -> Result<PeripheralTimingModel, ComponentError> {
    if beta == 0 {
        return Err(ComponentError::ZeroBeta);
    }
    let clock = t.require_clock(&p.clock)?;
    match (&p.kind, case) {
        (PeripheralKind::MainMemory(m), Some(case)) => {
            let mt = MainMemoryTiming::resolve(t, m, mode)?;
            let chi = m.llc_fifo_depth;
            Ok(match case {
                MemoryCase::Hit => PeripheralTimingModel {
                    chi_read: chi,
                    chi_write: chi,
                    rho: 1,
                    theta: 1,
                    t_ctrl_read: llc_hit_ctrl(&mt.llc),
                    t_ctrl_write: llc_hit_ctrl(&mt.llc),
                    t_data: WordTime::from_duration(llc_hit_data(&mt.llc)),
                },
                MemoryCase::MissRefill | MemoryCase::MissRefillEvict => {
                    let mb = ms_miss_bound(beta, case == MemoryCase::MissRefillEvict, &mt)?;
                    PeripheralTimingModel {
                        chi_read: chi,
                        chi_write: chi,
                        rho: 0,
                        theta: 0,
                        t_ctrl_read: mb.t_ctrl,
                        t_ctrl_write: mb.t_ctrl,
                        t_data: mb.t_data,
                    }
                }
            })
        }
        (PeripheralKind::MainMemory(_), None) => Err(ComponentError::MemoryCaseMissing(p.id.clone())),
        (_, Some(_)) => Err(ComponentError::MemoryCaseSuperfluous(p.id.clone())),
        (PeripheralKind::Spm(s), None) => Ok(spm_timing(s.fifo_depth, clock)),
        (PeripheralKind::IoSubsystem(io), None) => Ok(io_timing(io.fifo_depth, clock)),
        (PeripheralKind::Generic(g), None) => Ok(g.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ns(n: u64) -> ClockDomain {
        ClockDomain::new("c", Duration::from_ns(n))
    }

    #[test]
    fn breakdown_terms_sum() {
        let b = hmc_ctrl(TransactionKind::Read, &ns(1), &ns(5));
        assert_eq!(b.terms.iter().map(|t| t.1).sum::<Duration>(), b.total);
        assert_eq!(b.term("front-end"), Some(Duration::from_ns(5)));
    }

    #[test]
    fn memory_case_parses_cli_spellings() {
        assert_eq!("miss-refill-evict".parse::<MemoryCase>(), Ok(MemoryCase::MissRefillEvict));
        assert_eq!("HIT".parse::<MemoryCase>(), Ok(MemoryCase::Hit));
        assert!("sometimes".parse::<MemoryCase>().is_err());
    }
}
