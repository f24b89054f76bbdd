use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::SimError;
use crate::component::MemoryCase;
use crate::model::{Duration, TransactionKind};

/// One completed transaction as seen at the controller's manager interface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub id: u64,
    pub kind: TransactionKind,
    pub beta: u32,
    pub issuer: String,
    pub target: String,
    pub addr: u64,
    pub issued: Duration,
    pub accepted: Duration,
    pub completed: Duration,
    /// Time spent in the crossbar: waiting for a grant plus both traversals.
    pub xbar: Duration,
    /// Time spent in bridges, request and response directions together.
    pub bridge: Duration,
    pub periph_accept: Duration,
    pub periph_done: Duration,
    pub mem_case: Option<MemoryCase>,
}

impl TraceRecord {
    pub fn service(&self) -> Duration {
        self.completed - self.issued
    }

    /// The exported line: `id,kind,beta,issuer,target,issued_ps,accepted_ps,completed_ps`.
    pub fn export_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.id,
            self.kind,
            self.beta,
            self.issuer,
            self.target,
            self.issued.as_ps(),
            self.accepted.as_ps(),
            self.completed.as_ps()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStats {
    /// Ordered by transaction id.
    pub records: Vec<TraceRecord>,
    /// Per peripheral, the largest number of simultaneously accepted reads and writes.
    pub outstanding: BTreeMap<String, [u32; 2]>,
    /// SHA-256 of the exported trace, hex encoded.
    pub hash: String,
    pub events: u64,
}

fn kind_index(kind: TransactionKind) -> usize {
    match kind {
        TransactionKind::Read => 0,
        TransactionKind::Write => 1,
    }
}

impl TraceStats {
    pub(crate) fn new(mut records: Vec<TraceRecord>, outstanding: BTreeMap<String, [u32; 2]>, events: u64) -> Self {
        records.sort_by_key(|r| r.id);
        let mut hasher = Sha256::new();
        for r in &records {
            hasher.update(r.export_line().as_bytes());
            hasher.update(b"\n");
        }
        let mut hash = String::with_capacity(64);
        for b in hasher.finalize() {
            let _ = write!(hash, "{b:02x}");
        }
        TraceStats { records, outstanding, hash, events }
    }

    pub fn export(&self) -> String {
        let mut out = String::from("id,kind,beta,issuer,target,issued_ps,accepted_ps,completed_ps\n");
        for r in &self.records {
            out.push_str(&r.export_line());
            out.push('\n');
        }
        out
    }

    pub fn by_issuer<'a>(&'a self, issuer: &'a str) -> impl Iterator<Item = &'a TraceRecord> + 'a {
        self.records.iter().filter(move |r| r.issuer == issuer)
    }

    /// Largest service time per (kind, β) over `records`.
    pub fn maxima<'a>(records: impl Iterator<Item = &'a TraceRecord>) -> BTreeMap<(TransactionKind, u32), Duration> {
        let mut m = BTreeMap::new();
        for r in records {
            let e = m.entry((r.kind, r.beta)).or_insert(Duration::ZERO);
            *e = (*e).max(r.service());
        }
        m
    }
}

/// Exact maximum of completed − issued over records of `kind` and `beta`.
pub fn max_service(stats: &TraceStats, kind: TransactionKind, beta: u32) -> Result<Duration, SimError> {
    stats
        .records
        .iter()
        .filter(|r| r.kind == kind && r.beta == beta)
        .map(TraceRecord::service)
        .max()
        .ok_or(SimError::NoRecords { kind, beta })
}

pub fn max_outstanding(stats: &TraceStats, peripheral: &str, kind: TransactionKind) -> Result<u32, SimError> {
    stats
        .outstanding
        .get(peripheral)
        .map(|o| o[kind_index(kind)])
        .ok_or_else(|| SimError::UnknownPeripheral(peripheral.to_string()))
}
