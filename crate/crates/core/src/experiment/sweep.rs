use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{SuiteConfig, TargetCell};
use super::suites::*;
use super::{ExperimentError, ValidationReport};
use crate::component::MemoryCase;
use crate::model::{Topology, TransactionKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Beta,
    Phi,
    /// Manager clock period of the CDC cell, in nanoseconds.
    ClockRatio,
    FifoDepth,
}

impl FromStr for Dimension {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "beta" => Ok(Dimension::Beta),
            "phi" => Ok(Dimension::Phi),
            "clock_ratio" => Ok(Dimension::ClockRatio),
            "fifo_depth" => Ok(Dimension::FifoDepth),
            _ => Err(ExperimentError::Config(format!("unknown sweep dimension `{s}`"))),
        }
    }
}

impl Dimension {
    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Beta => "beta",
            Dimension::Phi => "phi",
            Dimension::ClockRatio => "clock_ratio",
            Dimension::FifoDepth => "fifo_depth",
        }
    }
}

/// Parses `a,b,c`, `a..b` (inclusive) or `a..b/step`.
pub fn parse_range(s: &str) -> Result<Vec<u64>, ExperimentError> {
    let bad = || ExperimentError::Config(format!("bad range `{s}`: expected `a,b,c`, `a..b` or `a..b/step`"));
    let num = |x: &str| x.trim().parse::<u64>().map_err(|_| bad());
    let out: Vec<u64> = if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once('/') {
            Some((h, st)) => (num(h)?, num(st)?),
            None => (num(rest)?, 1),
        };
        let lo = num(lo)?;
        if step == 0 || hi < lo {
            return Err(bad());
        }
        (lo..=hi).step_by(step as usize).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SweepRequest {
    pub dimension: Dimension,
    pub values: Vec<u64>,
    pub controller: Option<String>,
    pub peripheral: Option<String>,
    pub kind: Option<TransactionKind>,
    pub memory_case: Option<MemoryCase>,
    /// Burst length for dimensions other than `beta`.
    pub beta: u32,
}

/// One long-format output row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub dimension: &'static str,
    pub point: u64,
    pub scenario: String,
    pub kind: TransactionKind,
    pub metric: &'static str,
    pub value: u64,
}

fn narrow(v: u64) -> Result<u32, ExperimentError> {
    u32::try_from(v).map_err(|_| ExperimentError::Config(format!("sweep value {v} out of range")))
}

pub fn run_sweep(t: &Topology, req: &SweepRequest, cfg: &SuiteConfig, opts: &RunOptions) -> Result<Vec<SweepPoint>, ExperimentError> {
    let controller = match &req.controller {
        Some(c) => c.clone(),
        None => t.controllers.first().map(|c| c.id.clone()).ok_or_else(|| ExperimentError::Config("topology has no controller".into()))?,
    };
    let peripheral = req.peripheral.clone().unwrap_or_else(|| "spm".to_string());
    let kinds: Vec<TransactionKind> = match req.kind {
        Some(k) => vec![k],
        None => vec![TransactionKind::Read, TransactionKind::Write],
    };
    let cell = TargetCell { peripheral: peripheral.clone(), case: req.memory_case };
    let seeds: Vec<u64> = (opts.base_seed..opts.base_seed + opts.seeds.max(1)).collect();
    let count = opts.count.unwrap_or(if opts.full { cfg.full_count } else { cfg.count });
    let cells = std::slice::from_ref(&cell);
    let ctrls = std::slice::from_ref(&controller);

    let per_value = |v: u64| -> Result<ValidationReport, ExperimentError> {
        match req.dimension {
            Dimension::Beta => isolation_suite(t, ctrls, cells, &kinds, &[narrow(v)?], &seeds, count, cfg.isolation.jitter_cycles, opts.hram_mode),
            Dimension::Phi => {
                let count = opts.count.unwrap_or(cfg.interference.count.unwrap_or(cfg.count));
                let r = interference_suite(t, ctrls, cells, &[narrow(v)?], &[req.beta], &seeds, count, opts.hram_mode)?;
                Ok(ValidationReport::new(r.rows.into_iter().filter(|row| kinds.contains(&row.kind)).collect(), r.summary.case_mismatches))
            }
            Dimension::ClockRatio => {
                let seeds: Vec<u64> = (opts.base_seed..opts.base_seed + opts.seeds.max(cfg.cdc.min_seeds)).collect();
                let count = opts.count.unwrap_or(cfg.cdc.count.unwrap_or(cfg.count));
                let r = cdc_suite(&[v * 1000], cfg.cdc.subordinate_period_ps, &seeds, count)?;
                Ok(ValidationReport::new(r.rows.into_iter().filter(|row| kinds.contains(&row.kind)).collect(), 0))
            }
            Dimension::FifoDepth => {
                let p = &cfg.parallelism;
                let count = opts.count.unwrap_or(p.count.unwrap_or(cfg.count));
                let r = parallelism_suite(t, std::slice::from_ref(&peripheral), &[narrow(v)?], req.beta, p.outstanding, &seeds, count)?;
                Ok(ValidationReport::new(r.rows.into_iter().filter(|row| kinds.contains(&row.kind)).collect(), 0))
            }
        }
    };
    let reports: Vec<(u64, Result<ValidationReport, ExperimentError>)> = req.values.par_iter().map(|&v| (v, per_value(v))).collect();

    let metrics: [&'static str; 2] = match req.dimension {
        Dimension::FifoDepth => ["depth", "max_outstanding"],
        _ => ["bound_ps", "measured_ps"],
    };
    let mut out = Vec::new();
    for (v, r) in reports {
        for row in r?.rows {
            for (metric, value) in metrics.into_iter().zip([row.bound_ps, row.measured_ps]) {
                out.push(SweepPoint { dimension: req.dimension.as_str(), point: v, scenario: row.scenario.clone(), kind: row.kind, metric, value });
            }
        }
    }
    Ok(out)
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dimension", "point", "scenario", "kind", "metric", "value"]).expect("in-memory write");
    for p in points {
        w.write_record([p.dimension.to_string(), p.point.to_string(), p.scenario.clone(), p.kind.to_string(), p.metric.to_string(), p.value.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}
