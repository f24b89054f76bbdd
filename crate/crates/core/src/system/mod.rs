//! End-to-end bounds: isolation delay, interference counts and the
//! per-interferer delay, composed into a worst-case response time.

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::component::*;
use crate::model::*;

/// Largest AXI burst; used when the interfering burst length is left open.
pub const MAX_BURST: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Component(#[from] ComponentError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid query: {0}")]
    Query(String),
    #[error("measured time must be positive")]
    ZeroMeasured,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransactionQuery {
    pub controller: String,
    pub peripheral: String,
    pub kind: TransactionKind,
    pub beta: u32,
    pub interferer_beta: u32,
    pub memory_case: Option<MemoryCase>,
    /// Position of the analyzed transaction in a batch issued back to back.
    pub v: u32,
    pub hram_mode: HramDataMode,
}

impl TransactionQuery {
    /// A V = 1 query whose interferers use the same burst length.
    pub fn new(controller: &str, peripheral: &str, kind: TransactionKind, beta: u32) -> Self {
        TransactionQuery {
            controller: controller.to_string(),
            peripheral: peripheral.to_string(),
            kind,
            beta,
            interferer_beta: beta,
            memory_case: None,
            v: 1,
            hram_mode: HramDataMode::default(),
        }
    }

    pub fn with_case(mut self, case: MemoryCase) -> Self {
        self.memory_case = Some(case);
        self
    }

    pub fn with_interferer_beta(mut self, beta_k: u32) -> Self {
        self.interferer_beta = beta_k;
        self
    }

    pub fn with_v(mut self, v: u32) -> Self {
        self.v = v;
        self
    }

    /// Interferers are unconstrained: assume the longest burst the target accepts.
    pub fn with_worst_interferer_beta(mut self, t: &Topology) -> Self {
        self.interferer_beta = match t.peripheral(&self.peripheral) {
            Some(p) => effective_beta(p, MAX_BURST),
            None => MAX_BURST,
        };
        self
    }

    fn check(&self, t: &Topology) -> Result<(), AnalysisError> {
        let c = t.require_controller(&self.controller)?;
        t.require_peripheral(&self.peripheral)?;
        if self.beta < 1 || self.interferer_beta < 1 {
            return Err(AnalysisError::Query("burst lengths must be at least 1".into()));
        }
        if self.v < 1 || self.v > c.phi(self.kind) {
            return Err(AnalysisError::Query(format!(
                "V = {} outside [1, {}] for `{}`",
                self.v,
                c.phi(self.kind),
                c.id
            )));
        }
        Ok(())
    }
}

/// Crossbar contenders for a target: the analyzed controller plus every interferer.
fn contenders(t: &Topology, q: &TransactionQuery) -> Result<u32, AnalysisError> {
    Ok(interfering_set(t, &q.controller, &q.peripheral)?.len() as u32 + 1)
}

fn xbar(t: &Topology, q: &TransactionQuery) -> Result<BoundBreakdown, AnalysisError> {
    Ok(xbar_delay(q.kind, contenders(t, q)?, t.crossbar_clock()?)?)
}

/// Delay of every bridge on the controller's path, in path order.
pub fn bridge_delay(t: &Topology, controller: &str, kind: TransactionKind) -> Result<BoundBreakdown, AnalysisError> {
    let c = t.require_controller(controller)?;
    let mut b = BoundBreakdown::new();
    for id in &c.bridge_path {
        let bridge = t.require_bridge(id)?;
        match &bridge.kind {
            BridgeKind::CdcFifo { tx_clock, rx_clock, .. } => {
                let d = cdc_transaction_delay(t.require_clock(tx_clock)?, t.require_clock(rx_clock)?, kind);
                b.absorb(id, d);
            }
            BridgeKind::FixedDelay { d_read, d_write } => {
                let d = match kind {
                    TransactionKind::Read => *d_read,
                    TransactionKind::Write => *d_write,
                };
                b.push(id.clone(), d);
            }
        }
    }
    Ok(b)
}

fn specialized(t: &Topology, q: &TransactionQuery, beta: u32) -> Result<(PeripheralTimingModel, u32), AnalysisError> {
    let p = t.require_peripheral(&q.peripheral)?;
    let beta = effective_beta(p, beta);
    Ok((specialize_peripheral(t, p, beta, q.memory_case, q.hram_mode)?, beta))
}

/// Response time with no interference: peripheral service, bridges and crossbar.
pub fn isolation_bound(t: &Topology, q: &TransactionQuery) -> Result<BoundBreakdown, AnalysisError> {
    q.check(t)?;
    let (tm, beta) = specialized(t, q, q.beta)?;
    let mut b = BoundBreakdown::new()
        .with("peripheral/ctrl", tm.t_ctrl(q.kind))
        .with("peripheral/data", tm.t_data.for_beats(beta as u64));
    for (l, d) in bridge_delay(t, &q.controller, q.kind)?.terms {
        b.push(format!("bridge/{l}"), d);
    }
    b.absorb("crossbar", xbar(t, q)?);
    Ok(b)
}

/// Both arms of the same-type interference count, plus the alternate
/// formulation that charges φ of the analyzed controller per interferer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SameTypeCount {
    pub value: u64,
    pub outstanding_arm: u64,
    pub arbitration_arm: u64,
    pub alternate: u64,
}

/// The count from plain numbers. `phis` are the interferers' φ for the kind.
pub fn same_type_count(phis: &[u32], chi: u32, v: u32, phi_own: u32) -> SameTypeCount {
    let sum: u64 = phis.iter().map(|&p| p as u64).sum();
    let n = phis.len() as u64;
    let v = v as u64;
    let outstanding_arm = v - 1 + sum;
    let arbitration_arm = v - 1 + chi as u64 + v * n;
    SameTypeCount {
        value: outstanding_arm.min(arbitration_arm),
        outstanding_arm,
        arbitration_arm,
        alternate: sum.min(chi as u64 + phi_own as u64 * n),
    }
}

/// The single-transaction form: min(Σφ, χ + |Ψ|).
pub fn same_type_count_v1(phis: &[u32], chi: u32) -> u64 {
    let sum: u64 = phis.iter().map(|&p| p as u64).sum();
    sum.min(chi as u64 + phis.len() as u64)
}

pub fn same_type_interference_count(t: &Topology, q: &TransactionQuery) -> Result<SameTypeCount, AnalysisError> {
    q.check(t)?;
    let own = t.require_controller(&q.controller)?;
    let phis: Vec<u32> = interfering_set(t, &q.controller, &q.peripheral)?
        .into_iter()
        .map(|id| t.require_controller(id).map(|c| c.phi(q.kind)))
        .collect::<Result<_, _>>()?;
    let (tm, _) = specialized(t, q, q.beta)?;
    Ok(same_type_count(&phis, tm.chi(q.kind), q.v, own.phi(q.kind)))
}

/// Other-kind transactions that can slip in: none with independent paths, otherwise one per same-type slot plus one.
pub fn cross_type_interference_count(s: u64, theta: u8) -> u64 {
    if theta == 1 {
        0
    } else {
        s + 1
    }
}

/// Worst-case delay a single interfering transaction adds.
pub fn per_interferer_delay(t: &Topology, q: &TransactionQuery) -> Result<BoundBreakdown, AnalysisError> {
    q.check(t)?;
    let (tm, beta_k) = specialized(t, q, q.interferer_beta)?;
    let mut b = BoundBreakdown::new();
    b.absorb("crossbar", xbar(t, q)?);
    let ctrl = if tm.rho == 1 {
        Duration::ZERO
    } else if tm.theta == 0 {
        tm.t_ctrl_read.max(tm.t_ctrl_write)
    } else {
        tm.t_ctrl(q.kind)
    };
    b.push("peripheral/ctrl", ctrl);
    b.push("peripheral/data", tm.t_data.for_beats(beta_k as u64));
    Ok(b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WcrtBound {
    pub isolation: BoundBreakdown,
    pub same_type: SameTypeCount,
    pub cross_type: u64,
    pub delta: BoundBreakdown,
    pub total: Duration,
    pub warnings: Vec<String>,
}

impl WcrtBound {
    pub fn s(&self) -> u64 {
        self.same_type.value
    }

    pub fn u(&self) -> u64 {
        self.cross_type
    }

    /// Labeled additive terms of the total.
    pub fn breakdown(&self) -> BoundBreakdown {
        let mut b = self.isolation.clone();
        b.push("interference", (self.s() + self.u()) * self.delta.total);
        b
    }
}

pub fn wcrt(t: &Topology, q: &TransactionQuery) -> Result<WcrtBound, AnalysisError> {
    let isolation = isolation_bound(t, q)?;
    let same_type = same_type_interference_count(t, q)?;
    let (tm, _) = specialized(t, q, q.beta)?;
    let cross_type = cross_type_interference_count(same_type.value, tm.theta);
    let delta = per_interferer_delay(t, q)?;
    let total = isolation.total + (same_type.value + cross_type) * delta.total;
    let mut warnings = Vec::new();
    if q.v > 1 && !t.require_controller(&q.controller)?.bridge_path.is_empty() {
        warnings.push(format!(
            "V = {} with bridges on the path of `{}`: the bound assumes no queue is buffered inside the bridges",
            q.v, q.controller
        ));
    }
    Ok(WcrtBound { isolation, same_type, cross_type, delta, total, warnings })
}

/// 100·(bound − measured)/measured, exact. Negative means the bound was violated.
pub fn pessimism_pct(bound: Duration, measured: Duration) -> Result<Ratio<i128>, AnalysisError> {
    if measured.is_zero() {
        return Err(AnalysisError::ZeroMeasured);
    }
    let b = bound.as_ps() as i128;
    let m = measured.as_ps() as i128;
    Ok(Ratio::new(100 * (b - m), m))
}

pub fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
