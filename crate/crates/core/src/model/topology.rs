use std::fmt;

use serde::{Deserialize, Serialize};

use super::time::{Duration, WordTime};
use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransactionKind {
    Read,
    Write,
}

impl TransactionKind {
    pub const ALL: [TransactionKind; 2] = [TransactionKind::Read, TransactionKind::Write];

    pub fn other(self) -> TransactionKind {
        match self {
            TransactionKind::Read => TransactionKind::Write,
            TransactionKind::Write => TransactionKind::Read,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TransactionKind::Read => "read",
            TransactionKind::Write => "write",
        }
    }
}

impl fmt::Display for TransactionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TransactionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "read" | "r" => Ok(TransactionKind::Read),
            "write" | "w" => Ok(TransactionKind::Write),
            other => Err(format!("unknown transaction kind `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockDomain {
    pub name: String,
    pub period: Duration,
}

impl ClockDomain {
    pub fn new(name: impl Into<String>, period: Duration) -> Self {
        ClockDomain { name: name.into(), period }
    }

    /// `n` periods of this clock.
    pub fn cycles(&self, n: u64) -> Duration {
        self.period * n
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllerModel {
    pub id: String,
    pub clock: String,
    pub phi_read: u32,
    pub phi_write: u32,
    /// Bridges crossed between this controller and the crossbar, controller side first.
    pub bridge_path: Vec<String>,
}

impl ControllerModel {
    pub fn phi(&self, kind: TransactionKind) -> u32 {
        match kind {
            TransactionKind::Read => self.phi_read,
            TransactionKind::Write => self.phi_write,
        }
    }

    pub fn set_phi(&mut self, kind: TransactionKind, phi: u32) {
        match kind {
            TransactionKind::Read => self.phi_read = phi,
            TransactionKind::Write => self.phi_write = phi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BridgeKind {
    /// Asynchronous FIFO; `tx_clock` is the controller side.
    CdcFifo { tx_clock: String, rx_clock: String, depth: u32 },
    FixedDelay { d_read: Duration, d_write: Duration },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgeModel {
    pub id: String,
    pub kind: BridgeKind,
}

/// Service characterization of a peripheral: parallelism, pipelining and
/// read/write independence flags, control and per-word data times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeripheralTimingModel {
    pub chi_read: u32,
    pub chi_write: u32,
    pub rho: u8,
    pub theta: u8,
    pub t_ctrl_read: Duration,
    pub t_ctrl_write: Duration,
    pub t_data: WordTime,
}

impl PeripheralTimingModel {
    pub fn chi(&self, kind: TransactionKind) -> u32 {
        match kind {
            TransactionKind::Read => self.chi_read,
            TransactionKind::Write => self.chi_write,
        }
    }

    pub fn t_ctrl(&self, kind: TransactionKind) -> Duration {
        match kind {
            TransactionKind::Read => self.t_ctrl_read,
            TransactionKind::Write => self.t_ctrl_write,
        }
    }

    /// Service time in isolation for a `beta`-word burst: control plus data time.
    pub fn service_bound(&self, kind: TransactionKind, beta: u32) -> Duration {
        self.t_ctrl(kind) + self.t_data.for_beats(beta as u64)
    }

    pub fn is_pipelined(&self) -> bool {
        self.rho == 1
    }

    pub fn rw_parallel(&self) -> bool {
        self.theta == 1
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HramDataMode {
    /// Data-time formula evaluated exactly as printed (back-end width times the word ratio).
    Literal,
    /// One back-end cycle per back-end word, the ratio of the widths rounded up.
    #[default]
    PhysicalCeil,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpmParams {
    pub fifo_depth: u32,
    pub bank_count: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IoParams {
    pub fifo_depth: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MainMemoryParams {
    pub llc_clock: String,
    pub hmc_clock: String,
    pub hram_clock: String,
    /// Cache line length in AXI words.
    pub line_width: u32,
    pub llc_fifo_depth: u32,
    pub dw_axi: u32,
    pub dw_hyper: u32,
    pub hram_access_latency_cycles: u32,
    pub set_count: u32,
    pub way_count: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PeripheralKind {
    Spm(SpmParams),
    IoSubsystem(IoParams),
    MainMemory(MainMemoryParams),
    Generic(PeripheralTimingModel),
}

impl PeripheralKind {
    pub fn name(&self) -> &'static str {
        match self {
            PeripheralKind::Spm(_) => "spm",
            PeripheralKind::IoSubsystem(_) => "io",
            PeripheralKind::MainMemory(_) => "main_memory",
            PeripheralKind::Generic(_) => "generic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeripheralModel {
    pub id: String,
    pub clock: String,
    pub kind: PeripheralKind,
}

impl PeripheralModel {
    /// Input-stage depth bounding accepted outstanding transactions of `kind`.
    pub fn fifo_depth(&self, kind: TransactionKind) -> u32 {
        match &self.kind {
            PeripheralKind::Spm(p) => p.fifo_depth,
            PeripheralKind::IoSubsystem(p) => p.fifo_depth,
            PeripheralKind::MainMemory(p) => p.llc_fifo_depth,
            PeripheralKind::Generic(t) => t.chi(kind),
        }
    }

    pub fn set_fifo_depth(&mut self, depth: u32) {
        match &mut self.kind {
            PeripheralKind::Spm(p) => p.fifo_depth = depth,
            PeripheralKind::IoSubsystem(p) => p.fifo_depth = depth,
            PeripheralKind::MainMemory(p) => p.llc_fifo_depth = depth,
            PeripheralKind::Generic(t) => {
                t.chi_read = depth;
                t.chi_write = depth;
            }
        }
    }

    pub fn main_memory(&self) -> Option<&MainMemoryParams> {
        match &self.kind {
            PeripheralKind::MainMemory(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossbarModel {
    pub clock: String,
    pub d_tab: u32,
    pub subordinate_port_count: u32,
    pub manager_port_count: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressRange {
    pub base: u64,
    pub size: u64,
}

impl AddressRange {
    pub fn end(&self) -> u64 {
        self.base.saturating_add(self.size)
    }

    pub fn contains(&self, addr: u64) -> bool {
        addr >= self.base && addr < self.end()
    }

    pub fn overlaps(&self, other: &AddressRange) -> bool {
        self.base < other.end() && other.base < self.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryRegion {
    pub peripheral: String,
    pub range: AddressRange,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub clocks: Vec<ClockDomain>,
    pub controllers: Vec<ControllerModel>,
    pub bridges: Vec<BridgeModel>,
    pub crossbar: CrossbarModel,
    pub peripherals: Vec<PeripheralModel>,
    pub memory_map: Vec<MemoryRegion>,
}

impl Topology {
    pub fn clock(&self, name: &str) -> Option<&ClockDomain> {
        self.clocks.iter().find(|c| c.name == name)
    }

    pub fn controller(&self, id: &str) -> Option<&ControllerModel> {
        self.controllers.iter().find(|c| c.id == id)
    }

    pub fn controller_index(&self, id: &str) -> Option<usize> {
        self.controllers.iter().position(|c| c.id == id)
    }

    pub fn bridge(&self, id: &str) -> Option<&BridgeModel> {
        self.bridges.iter().find(|b| b.id == id)
    }

    pub fn peripheral(&self, id: &str) -> Option<&PeripheralModel> {
        self.peripherals.iter().find(|p| p.id == id)
    }

    pub fn peripheral_index(&self, id: &str) -> Option<usize> {
        self.peripherals.iter().position(|p| p.id == id)
    }

    pub fn region(&self, peripheral: &str) -> Option<&AddressRange> {
        self.memory_map
            .iter()
            .find(|r| r.peripheral == peripheral)
            .map(|r| &r.range)
    }

    /// Peripheral selected by the crossbar demux for `addr`.
    pub fn route(&self, addr: u64) -> Option<&str> {
        self.memory_map
            .iter()
            .find(|r| r.range.contains(addr))
            .map(|r| r.peripheral.as_str())
    }

    pub fn crossbar_clock(&self) -> Result<&ClockDomain, ModelError> {
        self.clock(&self.crossbar.clock)
            .ok_or_else(|| ModelError::UnknownId(self.crossbar.clock.clone()))
    }

    pub fn require_clock(&self, name: &str) -> Result<&ClockDomain, ModelError> {
        self.clock(name).ok_or_else(|| ModelError::UnknownId(name.to_string()))
    }

    pub fn require_controller(&self, id: &str) -> Result<&ControllerModel, ModelError> {
        self.controller(id).ok_or_else(|| ModelError::UnknownId(id.to_string()))
    }

    pub fn require_peripheral(&self, id: &str) -> Result<&PeripheralModel, ModelError> {
        self.peripheral(id).ok_or_else(|| ModelError::UnknownId(id.to_string()))
    }

    pub fn require_bridge(&self, id: &str) -> Result<&BridgeModel, ModelError> {
        self.bridge(id).ok_or_else(|| ModelError::UnknownId(id.to_string()))
    }

    pub fn controller_mut(&mut self, id: &str) -> Option<&mut ControllerModel> {
        self.controllers.iter_mut().find(|c| c.id == id)
    }

    pub fn peripheral_mut(&mut self, id: &str) -> Option<&mut PeripheralModel> {
        self.peripherals.iter_mut().find(|p| p.id == id)
    }
}

/// Controllers other than `controller` that can reach `peripheral` through the crossbar.
///
/// Every manager port can address every subordinate, so this is every other controller.
pub fn interfering_set<'a>(
    topology: &'a Topology,
    controller: &str,
    peripheral: &str,
) -> Result<Vec<&'a str>, ModelError> {
    topology.require_controller(controller)?;
    topology.require_peripheral(peripheral)?;
    Ok(topology
        .controllers
        .iter()
        .filter(|c| c.id != controller)
        .map(|c| c.id.as_str())
        .collect())
}
