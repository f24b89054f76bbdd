//! JSON topology documents.
//!
//! The document is a strict schema: unknown keys are rejected, optional
//! depth and width parameters fall back to the defaults below.

use std::collections::HashSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::time::{Duration, WordTime};
use super::topology::*;
use super::ModelError;

pub const DEFAULT_SPM_FIFO_DEPTH: u32 = 4;
pub const DEFAULT_IO_FIFO_DEPTH: u32 = 2;
pub const DEFAULT_LLC_FIFO_DEPTH: u32 = 8;
pub const DEFAULT_CDC_DEPTH: u32 = 4;
pub const DEFAULT_D_TAB: u32 = 16;
pub const DEFAULT_LINE_WIDTH: u32 = 8;
pub const DEFAULT_DW_AXI: u32 = 64;
pub const DEFAULT_DW_HYPER: u32 = 32;
pub const DEFAULT_HRAM_LATENCY: u32 = 12;
pub const DEFAULT_SPM_BANKS: u32 = 16;
pub const DEFAULT_LLC_SETS: u32 = 256;
pub const DEFAULT_LLC_WAYS: u32 = 8;

fn d_spm_fifo() -> u32 {
    DEFAULT_SPM_FIFO_DEPTH
}
fn d_io_fifo() -> u32 {
    DEFAULT_IO_FIFO_DEPTH
}
fn d_llc_fifo() -> u32 {
    DEFAULT_LLC_FIFO_DEPTH
}
fn d_cdc() -> u32 {
    DEFAULT_CDC_DEPTH
}
fn d_tab() -> u32 {
    DEFAULT_D_TAB
}
fn d_lw() -> u32 {
    DEFAULT_LINE_WIDTH
}
fn d_dw_axi() -> u32 {
    DEFAULT_DW_AXI
}
fn d_dw_hyper() -> u32 {
    DEFAULT_DW_HYPER
}
fn d_latency() -> u32 {
    DEFAULT_HRAM_LATENCY
}
fn d_banks() -> u32 {
    DEFAULT_SPM_BANKS
}
fn d_sets() -> u32 {
    DEFAULT_LLC_SETS
}
fn d_ways() -> u32 {
    DEFAULT_LLC_WAYS
}

/// Addresses may be written as JSON integers or as `"0x..."` strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Addr(u64);

impl<'de> Deserialize<'de> for Addr {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(n) => Ok(Addr(n)),
            Raw::Text(s) => {
                let t = s.trim();
                let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
                    Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
                    None => t.replace('_', "").parse(),
                };
                parsed
                    .map(Addr)
                    .map_err(|_| serde::de::Error::custom(format!("invalid address `{s}`")))
            }
        }
    }
}

impl Serialize for Addr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{:x}", self.0))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeDoc {
    base: Addr,
    size: Addr,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClockDoc {
    name: String,
    period_ps: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerDoc {
    id: String,
    clock: String,
    phi_read: u32,
    phi_write: u32,
    #[serde(default)]
    bridge_path: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BridgeDoc {
    Cdc {
        id: String,
        tx_clock: String,
        rx_clock: String,
        #[serde(default = "d_cdc")]
        depth: u32,
    },
    Fixed {
        id: String,
        d_read_ps: u64,
        d_write_ps: u64,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossbarDoc {
    clock: String,
    #[serde(default = "d_tab")]
    d_tab: u32,
    #[serde(default)]
    subordinate_port_count: Option<u32>,
    #[serde(default)]
    manager_port_count: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PeripheralDoc {
    Spm {
        id: String,
        clock: String,
        #[serde(default = "d_spm_fifo")]
        fifo_depth: u32,
        #[serde(default = "d_banks")]
        bank_count: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        address: Option<RangeDoc>,
    },
    Io {
        id: String,
        clock: String,
        #[serde(default = "d_io_fifo")]
        fifo_depth: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        address: Option<RangeDoc>,
    },
    MainMemory {
        id: String,
        clock: String,
        #[serde(default)]
        llc_clock: Option<String>,
        #[serde(default)]
        hmc_clock: Option<String>,
        hram_clock: String,
        #[serde(default = "d_lw")]
        line_width: u32,
        #[serde(default = "d_llc_fifo")]
        llc_fifo_depth: u32,
        #[serde(default = "d_dw_axi")]
        dw_axi: u32,
        #[serde(default = "d_dw_hyper")]
        dw_hyper: u32,
        #[serde(default = "d_latency")]
        hram_access_latency_cycles: u32,
        #[serde(default = "d_sets")]
        set_count: u32,
        #[serde(default = "d_ways")]
        way_count: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        address: Option<RangeDoc>,
    },
    Generic {
        id: String,
        clock: String,
        chi_read: u32,
        chi_write: u32,
        rho: u8,
        theta: u8,
        t_ctrl_read_ps: u64,
        t_ctrl_write_ps: u64,
        t_data_ps: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        address: Option<RangeDoc>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionDoc {
    peripheral: String,
    base: Addr,
    size: Addr,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyDoc {
    clocks: Vec<ClockDoc>,
    controllers: Vec<ControllerDoc>,
    #[serde(default)]
    bridges: Vec<BridgeDoc>,
    crossbar: CrossbarDoc,
    peripherals: Vec<PeripheralDoc>,
    #[serde(default)]
    memory_map: Vec<RegionDoc>,
}

pub(crate) fn json_error(e: serde_json::Error) -> ModelError {
    let (line, column) = (e.line(), e.column());
    let full = e.to_string();
    // serde_json appends " at line X column Y"; the position is carried separately.
    let message = match full.rfind(" at line ") {
        Some(i) => full[..i].to_string(),
        None => full,
    };
    match e.classify() {
        serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
            ModelError::Syntax { line, column, message }
        }
        _ if message.starts_with("unknown field") || message.starts_with("unknown variant") => {
            ModelError::UnknownField { line, column, message }
        }
        _ if message.starts_with("missing field") => ModelError::MissingField { line, column, message },
        _ => ModelError::Schema { line, column, message },
    }
}

/// Parses a topology document. Structural invariants beyond the schema
/// (reference resolution, clock compatibility, ...) are left to
/// [`validate_topology`](super::validate_topology), except duplicate ids.
pub fn parse_topology(text: &str) -> Result<Topology, ModelError> {
    let doc: TopologyDoc = serde_json::from_str(text).map_err(json_error)?;
    let topology = from_doc(doc)?;
    check_unique_ids(&topology)?;
    Ok(topology)
}

pub fn serialize_topology(t: &Topology) -> String {
    serde_json::to_string_pretty(&to_doc(t)).expect("topology documents always serialize")
}

fn check_unique_ids(t: &Topology) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for c in &t.clocks {
        if !seen.insert(("clock", c.name.as_str())) {
            return Err(ModelError::DuplicateId(c.name.clone()));
        }
    }
    // Controllers, bridges and peripherals share one namespace.
    let mut ids = HashSet::new();
    let all = t
        .controllers
        .iter()
        .map(|c| &c.id)
        .chain(t.bridges.iter().map(|b| &b.id))
        .chain(t.peripherals.iter().map(|p| &p.id));
    for id in all {
        if !ids.insert(id.as_str()) {
            return Err(ModelError::DuplicateId(id.clone()));
        }
    }
    let mut mapped = HashSet::new();
    for r in &t.memory_map {
        if !mapped.insert(r.peripheral.as_str()) {
            return Err(ModelError::DuplicateId(format!("memory_map:{}", r.peripheral)));
        }
    }
    Ok(())
}

fn from_doc(doc: TopologyDoc) -> Result<Topology, ModelError> {
    let clocks = doc
        .clocks
        .into_iter()
        .map(|c| ClockDomain::new(c.name, Duration::from_ps(c.period_ps)))
        .collect();
    let controllers: Vec<ControllerModel> = doc
        .controllers
        .into_iter()
        .map(|c| ControllerModel {
            id: c.id,
            clock: c.clock,
            phi_read: c.phi_read,
            phi_write: c.phi_write,
            bridge_path: c.bridge_path,
        })
        .collect();
    let bridges = doc
        .bridges
        .into_iter()
        .map(|b| match b {
            BridgeDoc::Cdc { id, tx_clock, rx_clock, depth } => BridgeModel {
                id,
                kind: BridgeKind::CdcFifo { tx_clock, rx_clock, depth },
            },
            BridgeDoc::Fixed { id, d_read_ps, d_write_ps } => BridgeModel {
                id,
                kind: BridgeKind::FixedDelay {
                    d_read: Duration::from_ps(d_read_ps),
                    d_write: Duration::from_ps(d_write_ps),
                },
            },
        })
        .collect();

    let mut memory_map = Vec::new();
    let mut peripherals = Vec::new();
    for p in doc.peripherals {
        let (model, address) = peripheral_from_doc(p);
        if let Some(a) = address {
            memory_map.push(MemoryRegion {
                peripheral: model.id.clone(),
                range: AddressRange { base: a.base.0, size: a.size.0 },
            });
        }
        peripherals.push(model);
    }
    memory_map.extend(doc.memory_map.into_iter().map(|r| MemoryRegion {
        peripheral: r.peripheral,
        range: AddressRange { base: r.base.0, size: r.size.0 },
    }));

    let crossbar = CrossbarModel {
        clock: doc.crossbar.clock,
        d_tab: doc.crossbar.d_tab,
        subordinate_port_count: doc
            .crossbar
            .subordinate_port_count
            .unwrap_or(controllers.len() as u32),
        manager_port_count: doc
            .crossbar
            .manager_port_count
            .unwrap_or(peripherals.len() as u32),
    };
    Ok(Topology { clocks, controllers, bridges, crossbar, peripherals, memory_map })
}

fn peripheral_from_doc(p: PeripheralDoc) -> (PeripheralModel, Option<RangeDoc>) {
    match p {
        PeripheralDoc::Spm { id, clock, fifo_depth, bank_count, address } => (
            PeripheralModel { id, clock, kind: PeripheralKind::Spm(SpmParams { fifo_depth, bank_count }) },
            address,
        ),
        PeripheralDoc::Io { id, clock, fifo_depth, address } => (
            PeripheralModel { id, clock, kind: PeripheralKind::IoSubsystem(IoParams { fifo_depth }) },
            address,
        ),
        PeripheralDoc::MainMemory {
            id,
            clock,
            llc_clock,
            hmc_clock,
            hram_clock,
            line_width,
            llc_fifo_depth,
            dw_axi,
            dw_hyper,
            hram_access_latency_cycles,
            set_count,
            way_count,
            address,
        } => {
            let llc_clock = llc_clock.unwrap_or_else(|| clock.clone());
            let hmc_clock = hmc_clock.unwrap_or_else(|| llc_clock.clone());
            (
                PeripheralModel {
                    id,
                    clock,
                    kind: PeripheralKind::MainMemory(MainMemoryParams {
                        llc_clock,
                        hmc_clock,
                        hram_clock,
                        line_width,
                        llc_fifo_depth,
                        dw_axi,
                        dw_hyper,
                        hram_access_latency_cycles,
                        set_count,
                        way_count,
                    }),
                },
                address,
            )
        }
        PeripheralDoc::Generic {
            id,
            clock,
            chi_read,
            chi_write,
            rho,
            theta,
            t_ctrl_read_ps,
            t_ctrl_write_ps,
            t_data_ps,
            address,
        } => (
            PeripheralModel {
                id,
                clock,
                kind: PeripheralKind::Generic(PeripheralTimingModel {
                    chi_read,
                    chi_write,
                    rho,
                    theta,
                    t_ctrl_read: Duration::from_ps(t_ctrl_read_ps),
                    t_ctrl_write: Duration::from_ps(t_ctrl_write_ps),
                    t_data: WordTime::from_duration(Duration::from_ps(t_data_ps)),
                }),
            },
            address,
        ),
    }
}

fn to_doc(t: &Topology) -> TopologyDoc {
    TopologyDoc {
        clocks: t
            .clocks
            .iter()
            .map(|c| ClockDoc { name: c.name.clone(), period_ps: c.period.as_ps() })
            .collect(),
        controllers: t
            .controllers
            .iter()
            .map(|c| ControllerDoc {
                id: c.id.clone(),
                clock: c.clock.clone(),
                phi_read: c.phi_read,
                phi_write: c.phi_write,
                bridge_path: c.bridge_path.clone(),
            })
            .collect(),
        bridges: t
            .bridges
            .iter()
            .map(|b| match &b.kind {
                BridgeKind::CdcFifo { tx_clock, rx_clock, depth } => BridgeDoc::Cdc {
                    id: b.id.clone(),
                    tx_clock: tx_clock.clone(),
                    rx_clock: rx_clock.clone(),
                    depth: *depth,
                },
                BridgeKind::FixedDelay { d_read, d_write } => BridgeDoc::Fixed {
                    id: b.id.clone(),
                    d_read_ps: d_read.as_ps(),
                    d_write_ps: d_write.as_ps(),
                },
            })
            .collect(),
        crossbar: CrossbarDoc {
            clock: t.crossbar.clock.clone(),
            d_tab: t.crossbar.d_tab,
            subordinate_port_count: Some(t.crossbar.subordinate_port_count),
            manager_port_count: Some(t.crossbar.manager_port_count),
        },
        peripherals: t.peripherals.iter().map(peripheral_to_doc).collect(),
        memory_map: t
            .memory_map
            .iter()
            .map(|r| RegionDoc {
                peripheral: r.peripheral.clone(),
                base: Addr(r.range.base),
                size: Addr(r.range.size),
            })
            .collect(),
    }
}

fn peripheral_to_doc(p: &PeripheralModel) -> PeripheralDoc {
    let id = p.id.clone();
    let clock = p.clock.clone();
    match &p.kind {
        PeripheralKind::Spm(s) => PeripheralDoc::Spm {
            id,
            clock,
            fifo_depth: s.fifo_depth,
            bank_count: s.bank_count,
            address: None,
        },
        PeripheralKind::IoSubsystem(s) => PeripheralDoc::Io { id, clock, fifo_depth: s.fifo_depth, address: None },
        PeripheralKind::MainMemory(m) => PeripheralDoc::MainMemory {
            id,
            clock,
            llc_clock: Some(m.llc_clock.clone()),
            hmc_clock: Some(m.hmc_clock.clone()),
            hram_clock: m.hram_clock.clone(),
            line_width: m.line_width,
            llc_fifo_depth: m.llc_fifo_depth,
            dw_axi: m.dw_axi,
            dw_hyper: m.dw_hyper,
            hram_access_latency_cycles: m.hram_access_latency_cycles,
            set_count: m.set_count,
            way_count: m.way_count,
            address: None,
        },
        PeripheralKind::Generic(g) => PeripheralDoc::Generic {
            id,
            clock,
            chi_read: g.chi_read,
            chi_write: g.chi_write,
            rho: g.rho,
            theta: g.theta,
            t_ctrl_read_ps: g.t_ctrl_read.as_ps(),
            t_ctrl_write_ps: g.t_ctrl_write.as_ps(),
            // Generic documents carry whole-picosecond data times.
            t_data_ps: g.t_data.ratio().ceil().to_integer(),
            address: None,
        },
    }
}
