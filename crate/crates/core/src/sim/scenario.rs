use serde::{Deserialize, Serialize};

use crate::model::{json_error, ModelError, TransactionKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One transaction in flight at a time, with random gaps between them.
    Isolation,
    /// Keep the outstanding limit full for the whole run.
    Saturation,
    /// Saturate while the observed controller still has work.
    Interference,
    Idle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaDist {
    Fixed(u32),
    Uniform(Vec<u32>),
}

impl BetaDist {
    pub fn values(&self) -> &[u32] {
        match self {
            BetaDist::Fixed(b) => std::slice::from_ref(b),
            BetaDist::Uniform(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindMix {
    Read,
    Write,
    Alternate,
    Random,
}

impl From<TransactionKind> for KindMix {
    fn from(k: TransactionKind) -> Self {
        match k {
            TransactionKind::Read => KindMix::Read,
            TransactionKind::Write => KindMix::Write,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AddressPattern {
    /// Consecutive bursts through the controller's slice of the target.
    #[default]
    Sequential,
    /// A small preloaded footprint that always hits in the cache.
    HitLoop,
    /// Fresh lines whose victims are clean: miss with refill only.
    ColdMiss,
    /// Fresh lines whose victims are dirty: miss with refill and eviction.
    ConflictEvict,
}

fn default_count() -> u64 {
    1000
}

fn default_jitter() -> u32 {
    8
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    pub controller: String,
    pub mode: Mode,
    pub target: String,
    #[serde(default = "default_count")]
    pub count: u64,
    pub beta: BetaDist,
    pub kind: KindMix,
    #[serde(default)]
    pub pattern: AddressPattern,
    /// Replaces the controller's φ for both kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outstanding: Option<u32>,
    /// Isolation mode waits a uniform 0..=jitter controller cycles between transactions.
    #[serde(default = "default_jitter")]
    pub jitter_cycles: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub observed: String,
    pub workloads: Vec<Workload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    scenario: Scenario,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ModelError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(json_error)?;
    Ok(doc.scenario)
}

pub fn serialize_scenario(s: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioDoc { scenario: s.clone() }).expect("scenarios always serialize")
}

impl Scenario {
    pub fn workload(&self, controller: &str) -> Option<&Workload> {
        self.workloads.iter().find(|w| w.controller == controller)
    }
}
