use serde::Deserialize;

use crate::component::MemoryCase;
use crate::model::{json_error, ModelError};

pub const REFERENCE_TOPOLOGY: &str = include_str!("../../configs/reference_topology.json");
pub const DEFAULT_SUITES: &str = include_str!("../../configs/suites.json");

/// One target of the isolation or interference suite.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetCell {
    pub peripheral: String,
    #[serde(default)]
    pub case: Option<MemoryCase>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsolationSuite {
    pub cells: Vec<TargetCell>,
    #[serde(default)]
    pub count: Option<u64>,
    pub jitter_cycles: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceSuite {
    pub cells: Vec<TargetCell>,
    #[serde(default)]
    pub count: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelismSuite {
    pub peripherals: Vec<String>,
    pub depths: Vec<u32>,
    pub beta: u32,
    /// Outstanding limit given to the saturating controller.
    pub outstanding: u32,
    #[serde(default)]
    pub count: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossbarSuite {
    pub peripheral: String,
    pub contenders: Vec<u32>,
    #[serde(default)]
    pub count: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdcSuite {
    pub manager_periods_ps: Vec<u64>,
    pub subordinate_period_ps: u64,
    /// Lower bound on phase seeds per clock pair, whatever `--seeds` says.
    pub min_seeds: u64,
    #[serde(default)]
    pub count: Option<u64>,
}

/// Parameters of the built-in suites. Nothing suite-specific is hard-coded.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub betas: Vec<u32>,
    pub phis: Vec<u32>,
    pub count: u64,
    pub full_count: u64,
    pub isolation: IsolationSuite,
    pub interference: InterferenceSuite,
    pub parallelism: ParallelismSuite,
    pub crossbar: CrossbarSuite,
    pub cdc: CdcSuite,
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn reference() -> Self {
        Self::parse(DEFAULT_SUITES).expect("the bundled suite file parses")
    }
}
