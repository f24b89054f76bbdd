//! Shared fixtures and hand-written reference formulas. The formulas are
//! deliberately re-derived here in plain integer nanoseconds instead of
//! calling into the library, so a test comparing the two checks something.
#![allow(dead_code)]

use wcrt_core::model::{parse_topology, Topology};

pub mod oracle {
    pub fn cdc_hop(tx: u64, rx: u64) -> u64 {
        tx + 4 * rx
    }

    pub fn cdc_round_trip(ctrl: u64, periph: u64) -> u64 {
        cdc_hop(ctrl, periph) + cdc_hop(periph, ctrl)
    }

    /// (ctrl read, ctrl write, data per word)
    pub fn spm(t: u64) -> (u64, u64, u64) {
        (6 * t, 5 * t, t)
    }

    pub fn io(t: u64) -> (u64, u64, u64) {
        (4 * t, 3 * t, t)
    }

    pub fn hmc(read: bool, hmc: u64, hram: u64) -> u64 {
        let back = if read { cdc_hop(hram, hmc) } else { 0 };
        5 * hmc + cdc_hop(hmc, hram) + back + 2 * hram
    }

    pub fn hram(t: u64, latency: u64) -> u64 {
        (3 + latency) * t
    }

    pub fn word(dw_axi: u64, dw_hyper: u64, t: u64, literal: bool) -> u64 {
        let cycles = dw_axi.div_ceil(dw_hyper);
        if literal {
            cycles * dw_hyper * t
        } else {
            cycles * t
        }
    }

    pub struct Mem {
        pub llc: u64,
        pub hmc: u64,
        pub hram: u64,
        pub lw: u64,
        pub latency: u64,
        pub word: u64,
    }

    /// (t_ctrl, whole data phase) of a miss for a `beta`-word burst. The
    /// data phase is integral: (LW·n/β)·word·β = LW·n·word.
    pub fn miss(m: &Mem, beta: u64, evict: bool) -> (u64, u64) {
        let n = beta.div_ceil(m.lw);
        let hram = hram(m.hram, m.latency);
        let mut ctrl = 8 * m.llc + n * (hmc(true, m.hmc, m.hram) + hram);
        let mut data = beta * m.llc + m.lw * n * m.word;
        if evict {
            ctrl += n * (hmc(false, m.hmc, m.hram) + hram);
            data += m.lw * n * m.word;
        }
        (ctrl, data)
    }

    pub fn xbar(m: u64, t: u64) -> u64 {
        2 * t + (m - 1) * t
    }

    pub fn same_type(phis: &[u64], chi: u64, v: u64) -> u64 {
        let sum: u64 = phis.iter().sum();
        (v - 1 + sum).min(v - 1 + chi + v * phis.len() as u64)
    }

    pub fn cross_type(s: u64, theta: u64) -> u64 {
        (s + 1) * (1 - theta)
    }
}

/// Two controllers, everything on 1 ns clocks. `acc` sits behind a CDC FIFO;
/// `cpu` is attached directly. SPM depth 4, IO depth 2, LLC depth 8.
pub const TWO_DOMAIN_1NS: &str = r#"{
  "clocks": [
    {"name": "soc", "period_ps": 1000},
    {"name": "acc", "period_ps": 1000}
  ],
  "controllers": [
    {"id": "cpu", "clock": "soc", "phi_read": 4, "phi_write": 4},
    {"id": "acc", "clock": "acc", "phi_read": 4, "phi_write": 4, "bridge_path": ["acc_cdc"]}
  ],
  "bridges": [{"kind": "cdc", "id": "acc_cdc", "tx_clock": "acc", "rx_clock": "soc"}],
  "crossbar": {"clock": "soc", "d_tab": 16},
  "peripherals": [
    {"kind": "spm", "id": "spm", "clock": "soc", "fifo_depth": 4},
    {"kind": "io", "id": "io", "clock": "soc", "fifo_depth": 2},
    {"kind": "main_memory", "id": "mem", "clock": "soc", "hram_clock": "soc", "line_width": 8,
     "llc_fifo_depth": 8, "dw_axi": 64, "dw_hyper": 32, "hram_access_latency_cycles": 12}
  ],
  "memory_map": [
    {"peripheral": "spm", "base": "0x1000", "size": "0x1000"},
    {"peripheral": "io", "base": "0x2000", "size": "0x1000"},
    {"peripheral": "mem", "base": "0x100000", "size": "0x100000"}
  ]
}"#;

/// One controller, one SPM, one clock of 1 ns.
pub const MINIMAL: &str = r#"{
  "clocks": [{"name": "clk", "period_ps": 1000}],
  "controllers": [{"id": "cpu", "clock": "clk", "phi_read": 1, "phi_write": 1}],
  "crossbar": {"clock": "clk"},
  "peripherals": [{"kind": "spm", "id": "spm", "clock": "clk", "address": {"base": 0, "size": 4096}}]
}"#;

pub fn two_domain() -> Topology {
    parse_topology(TWO_DOMAIN_1NS).expect("fixture parses")
}

pub fn minimal() -> Topology {
    parse_topology(MINIMAL).expect("fixture parses")
}

pub const NS: u64 = 1000;
