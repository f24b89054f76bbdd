use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::topology::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    /// The element the diagnostic is about; empty for topology-wide issues.
    pub id: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        if self.id.is_empty() {
            write!(f, "{sev}: {}", self.message)
        } else {
            write!(f, "{sev}: [{}] {}", self.id, self.message)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationResult {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationResult {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }
}

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn error(&mut self, id: &str, message: impl Into<String>) {
        self.0.push(Diagnostic { severity: Severity::Error, message: message.into(), id: id.to_string() });
    }
    fn warn(&mut self, id: &str, message: impl Into<String>) {
        self.0.push(Diagnostic { severity: Severity::Warning, message: message.into(), id: id.to_string() });
    }
}

/// Checks every structural invariant of a topology. Diagnostics come out in
/// document order: clocks, controllers, bridges, crossbar, peripherals, memory map.
pub fn validate_topology(t: &Topology) -> ValidationResult {
    let mut s = Sink(Vec::new());
    check_clocks(t, &mut s);
    check_ids(t, &mut s);
    check_controllers(t, &mut s);
    check_bridges(t, &mut s);
    check_crossbar(t, &mut s);
    check_peripherals(t, &mut s);
    check_memory_map(t, &mut s);
    let ok = s.0.iter().all(|d| d.severity != Severity::Error);
    ValidationResult { ok, diagnostics: s.0 }
}

fn check_clocks(t: &Topology, s: &mut Sink) {
    let mut seen = HashSet::new();
    for c in &t.clocks {
        if c.period.is_zero() {
            s.error(&c.name, "clock period must be positive");
        }
        if !seen.insert(c.name.as_str()) {
            s.error(&c.name, "duplicate clock name");
        }
    }
}

fn check_ids(t: &Topology, s: &mut Sink) {
    let mut seen = HashSet::new();
    let ids = t
        .controllers
        .iter()
        .map(|c| &c.id)
        .chain(t.bridges.iter().map(|b| &b.id))
        .chain(t.peripherals.iter().map(|p| &p.id));
    for id in ids {
        if id.is_empty() {
            s.error("", "empty id");
        } else if !seen.insert(id.as_str()) {
            s.error(id, "duplicate id");
        }
    }
    if t.controllers.is_empty() {
        s.error("", "topology needs at least one controller");
    }
    if t.peripherals.is_empty() {
        s.error("", "topology needs at least one peripheral");
    }
}

fn clock_ref(t: &Topology, s: &mut Sink, owner: &str, name: &str) -> bool {
    if t.clock(name).is_none() {
        s.error(owner, format!("unknown clock `{name}`"));
        false
    } else {
        true
    }
}

fn check_controllers(t: &Topology, s: &mut Sink) {
    let mut users: HashMap<&str, Vec<&str>> = HashMap::new();
    for c in &t.controllers {
        clock_ref(t, s, &c.id, &c.clock);
        if c.phi_read < 1 {
            s.error(&c.id, "phi_read must be at least 1");
        }
        if c.phi_write < 1 {
            s.error(&c.id, "phi_write must be at least 1");
        }
        for b in &c.bridge_path {
            if t.bridge(b).is_none() {
                s.error(&c.id, format!("unknown bridge `{b}` in bridge_path"));
            }
            users.entry(b.as_str()).or_default().push(c.id.as_str());
        }
        if c.bridge_path.is_empty() && c.clock != t.crossbar.clock {
            s.error(&c.id, "controller without bridges must run on the crossbar clock");
        }
        check_cdc_chain(t, s, c);
    }
    for b in &t.bridges {
        match users.get(b.id.as_str()).map(Vec::as_slice) {
            None | Some([]) => s.error(&b.id, "bridge is not on any controller's path"),
            Some([_]) => {}
            Some(many) => s.error(&b.id, format!("bridge is shared by controllers {}", many.join(", "))),
        }
    }
}

/// CDC bridges on a path must chain clocks from the controller to the crossbar.
fn check_cdc_chain(t: &Topology, s: &mut Sink, c: &ControllerModel) {
    let mut current = c.clock.as_str();
    for b in c.bridge_path.iter().filter_map(|id| t.bridge(id)) {
        if let BridgeKind::CdcFifo { tx_clock, rx_clock, .. } = &b.kind {
            if tx_clock != current {
                s.error(&b.id, format!("CDC tx clock `{tx_clock}` does not match upstream clock `{current}`"));
            }
            current = rx_clock.as_str();
        }
    }
    if !c.bridge_path.is_empty() && current != t.crossbar.clock {
        s.error(&c.id, format!("bridge path ends on clock `{current}`, not the crossbar clock"));
    }
}

fn check_bridges(t: &Topology, s: &mut Sink) {
    for b in &t.bridges {
        if let BridgeKind::CdcFifo { tx_clock, rx_clock, depth } = &b.kind {
            let tx_ok = clock_ref(t, s, &b.id, tx_clock);
            let rx_ok = clock_ref(t, s, &b.id, rx_clock);
            if *depth < 2 {
                s.error(&b.id, "CDC FIFO depth must be at least 2");
            }
            if tx_ok && rx_ok {
                let (tx, rx) = (t.clock(tx_clock).unwrap(), t.clock(rx_clock).unwrap());
                if tx.period > rx.period {
                    s.warn(
                        &b.id,
                        "controller clock slower than the crossbar clock: multi-beat bursts are rate-limited by the controller side",
                    );
                }
            }
        }
    }
}

fn check_crossbar(t: &Topology, s: &mut Sink) {
    let x = &t.crossbar;
    clock_ref(t, s, "crossbar", &x.clock);
    if x.d_tab < 1 {
        s.error("crossbar", "d_tab must be at least 1");
    }
    let max_chi_w = t.peripherals.iter().map(|p| p.fifo_depth(TransactionKind::Write)).max().unwrap_or(0);
    if x.d_tab < max_chi_w {
        s.error(
            "crossbar",
            format!(
                "crossbar W-table smaller than peripheral write parallelism (d_tab {} < {max_chi_w})",
                x.d_tab
            ),
        );
    }
    if (x.subordinate_port_count as usize) < t.controllers.len() {
        s.error("crossbar", "fewer subordinate ports than controllers");
    }
    if (x.manager_port_count as usize) < t.peripherals.len() {
        s.error("crossbar", "fewer manager ports than peripherals");
    }
}

fn check_peripherals(t: &Topology, s: &mut Sink) {
    for p in &t.peripherals {
        let id = p.id.as_str();
        if clock_ref(t, s, id, &p.clock) && p.clock != t.crossbar.clock {
            s.error(id, "peripheral must run on the crossbar clock");
        }
        match &p.kind {
            PeripheralKind::Spm(sp) => {
                if sp.fifo_depth < 1 {
                    s.error(id, "fifo_depth must be at least 1");
                }
                if sp.bank_count < 1 {
                    s.error(id, "bank_count must be at least 1");
                }
            }
            PeripheralKind::IoSubsystem(io) => {
                if io.fifo_depth < 1 {
                    s.error(id, "fifo_depth must be at least 1");
                }
            }
            PeripheralKind::MainMemory(m) => check_main_memory(t, s, p, m),
            PeripheralKind::Generic(g) => {
                if g.chi_read < 1 || g.chi_write < 1 {
                    s.error(id, "chi values must be at least 1");
                }
                if g.rho > 1 || g.theta > 1 {
                    s.error(id, "rho and theta must be 0 or 1");
                }
            }
        }
    }
}

fn check_main_memory(t: &Topology, s: &mut Sink, p: &PeripheralModel, m: &MainMemoryParams) {
    let id = p.id.as_str();
    let llc_ok = clock_ref(t, s, id, &m.llc_clock);
    let hmc_ok = clock_ref(t, s, id, &m.hmc_clock);
    clock_ref(t, s, id, &m.hram_clock);
    if llc_ok && m.llc_clock != p.clock {
        s.error(id, "llc_clock must equal the peripheral clock");
    }
    if hmc_ok && m.hmc_clock != m.llc_clock {
        s.error(id, "hmc_clock must equal llc_clock");
    }
    if m.line_width < 1 {
        s.error(id, "line_width must be at least 1");
    }
    if m.llc_fifo_depth < 1 {
        s.error(id, "llc_fifo_depth must be at least 1");
    }
    for (name, w) in [("dw_axi", m.dw_axi), ("dw_hyper", m.dw_hyper)] {
        if w == 0 || w % 8 != 0 {
            s.error(id, format!("{name} must be a positive multiple of 8"));
        }
    }
    if !(7..=16).contains(&m.hram_access_latency_cycles) {
        s.error(id, "hram_access_latency_cycles must lie in [7, 16]");
    }
    if m.set_count < 1 || m.way_count < 1 {
        s.error(id, "set_count and way_count must be at least 1");
    }
}

fn check_memory_map(t: &Topology, s: &mut Sink) {
    for r in &t.memory_map {
        if t.peripheral(&r.peripheral).is_none() {
            s.error(&r.peripheral, "memory map entry for unknown peripheral");
        }
        if r.range.size == 0 {
            s.error(&r.peripheral, "address range is empty");
        }
        if r.range.base.checked_add(r.range.size).is_none() {
            s.error(&r.peripheral, "address range overflows the address space");
        }
    }
    for p in &t.peripherals {
        match t.memory_map.iter().filter(|r| r.peripheral == p.id).count() {
            0 => s.error(&p.id, "peripheral has no address range"),
            1 => {}
            _ => s.error(&p.id, "peripheral has more than one address range"),
        }
    }
    for (i, a) in t.memory_map.iter().enumerate() {
        for b in &t.memory_map[i + 1..] {
            if a.range.size > 0 && b.range.size > 0 && a.range.overlaps(&b.range) {
                s.error(
                    &a.peripheral,
                    format!("address ranges of `{}` and `{}` overlap", a.peripheral, b.peripheral),
                );
            }
        }
    }
}
