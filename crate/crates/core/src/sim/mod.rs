//! Cycle-level discrete-event simulator of the interconnect and its IPs.
//!
//! Runs are fully determined by (topology, scenario, seed). Each clock
//! domain gets a random phase drawn from stream 0 of a ChaCha8 generator
//! seeded with the run seed; controller `i` draws its traffic from stream
//! `i + 1` of the same seed.

mod cache;
mod clock;
mod engine;
mod kernel;
mod oracle;
mod periph;
mod scenario;
mod stats;

pub use cache::{Cache, Lookup, Prime};
pub use clock::{cdc_hop, Clock};
pub use engine::{build_sim, SimInstance};
pub use kernel::{EventQueue, Phase};
pub use oracle::{brute_force_interference_count, ORACLE_LIMIT};
pub use scenario::*;
pub use stats::{max_outstanding, max_service, TraceRecord, TraceStats};

use thiserror::Error;

use crate::model::{Duration, TransactionKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("horizon reached with {} completed transactions and work still pending", .0.records.len())]
    Horizon(Box<TraceStats>),
    #[error("no {kind} records with burst length {beta}")]
    NoRecords { kind: TransactionKind, beta: u32 },
    #[error("unknown peripheral `{0}`")]
    UnknownPeripheral(String),
    #[error("oracle instance of size {0} exceeds the limit of {ORACLE_LIMIT}")]
    OracleTooLarge(u32),
}

/// Runs a built instance. `max_transactions` caps every non-interfering
/// workload; `horizon` stops the run early, returning partial statistics
/// inside [`SimError::Horizon`].
pub fn run(sim: &mut SimInstance, max_transactions: Option<u64>, horizon: Option<Duration>) -> Result<TraceStats, SimError> {
    if let Some(m) = max_transactions {
        sim.cap_count(m);
    }
    sim.run(horizon)
}
