use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::{SuiteConfig, TargetCell};
use super::report::{ReportRow, ValidationReport};
use super::ExperimentError;
use crate::component::{effective_beta, xbar_delay, MemoryCase};
use crate::model::*;
use crate::sim::*;
use crate::system::{bridge_delay, isolation_bound, wcrt, TransactionQuery};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Isolation,
    Interference,
    Parallelism,
    Crossbar,
    Cdc,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Isolation, Suite::Interference, Suite::Parallelism, Suite::Crossbar, Suite::Cdc];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Isolation => "isolation",
            Suite::Interference => "interference",
            Suite::Parallelism => "parallelism",
            Suite::Crossbar => "crossbar",
            Suite::Cdc => "cdc",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seeds: u64,
    pub base_seed: u64,
    /// Overrides every suite's transaction count.
    pub count: Option<u64>,
    pub full: bool,
    pub hram_mode: HramDataMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seeds: 20, base_seed: 0, count: None, full: false, hram_mode: HramDataMode::default() }
    }
}

impl RunOptions {
    fn count(&self, cfg: &SuiteConfig, suite: Option<u64>) -> u64 {
        match self.count {
            Some(c) => c,
            None if self.full => cfg.full_count,
            None => suite.unwrap_or(cfg.count),
        }
    }

    fn seed_list(&self, min: u64) -> Vec<u64> {
        (self.base_seed..self.base_seed + self.seeds.max(min).max(1)).collect()
    }
}

const KINDS: [TransactionKind; 2] = [TransactionKind::Read, TransactionKind::Write];

type Job<'a> = Box<dyn Fn() -> Result<(ReportRow, u64), ExperimentError> + Send + Sync + 'a>;

fn run_jobs(jobs: Vec<Job<'_>>) -> Result<ValidationReport, ExperimentError> {
    let results: Vec<_> = jobs.par_iter().map(|j| j()).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut mismatches = 0;
    for r in results {
        let (row, m) = r?;
        rows.push(row);
        mismatches += m;
    }
    Ok(ValidationReport::new(rows, mismatches))
}

/// Per-seed outcome of a cell: the observed value (if any) and memory-case mismatches.
fn per_seed<F>(t: &Topology, s: &Scenario, seeds: &[u64], f: F) -> Result<Vec<(u64, Option<u64>, u64)>, ExperimentError>
where
    F: Fn(&TraceStats) -> Result<(Option<u64>, u64), ExperimentError>,
{
    let mut out = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let stats = build_sim(t, s, seed)?.run(None)?;
        let (v, m) = f(&stats)?;
        out.push((seed, v, m));
    }
    Ok(out)
}

/// Largest value over seeds, lowest seed on ties, plus the mismatch total.
fn reduce_max(runs: &[(u64, Option<u64>, u64)]) -> Result<(u64, u64, u64), ExperimentError> {
    let mut best: Option<(u64, u64)> = None;
    for &(seed, v, _) in runs {
        if let Some(v) = v {
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, seed));
            }
        }
    }
    let (v, seed) = best.ok_or_else(|| ExperimentError::Config("cell produced no observed transactions".into()))?;
    Ok((v, seed, runs.iter().map(|r| r.2).sum()))
}

/// Longest service among the observed controller's transactions of `kind`,
/// skipping (and counting) those whose memory case differs from `case`.
fn observed_service(stats: &TraceStats, observed: &str, kind: TransactionKind, case: Option<MemoryCase>) -> (Option<u64>, u64) {
    let mut best = None;
    let mut mismatches = 0;
    for r in stats.by_issuer(observed).filter(|r| r.kind == kind) {
        if case.is_some() && r.mem_case != case {
            mismatches += 1;
            continue;
        }
        best = best.max(Some(r.service().as_ps()));
    }
    (best, mismatches)
}

#[allow(clippy::too_many_arguments)]
fn workload(controller: &str, mode: Mode, target: &str, count: u64, beta: u32, kind: KindMix, pattern: AddressPattern, outstanding: Option<u32>, jitter: u32) -> Workload {
    Workload {
        controller: controller.to_string(),
        mode,
        target: target.to_string(),
        count,
        beta: BetaDist::Fixed(beta),
        kind,
        pattern,
        outstanding,
        jitter_cycles: jitter,
    }
}

fn pattern_for(case: Option<MemoryCase>) -> AddressPattern {
    match case {
        None => AddressPattern::Sequential,
        Some(MemoryCase::Hit) => AddressPattern::HitLoop,
        Some(MemoryCase::MissRefill) => AddressPattern::ColdMiss,
        Some(MemoryCase::MissRefillEvict) => AddressPattern::ConflictEvict,
    }
}

fn check_cell(t: &Topology, cell: &TargetCell) -> Result<(), ExperimentError> {
    let p = t.require_peripheral(&cell.peripheral)?;
    match (p.main_memory().is_some(), cell.case) {
        (true, None) => Err(ExperimentError::Config(format!("main memory `{}` needs a memory case", p.id))),
        (false, Some(_)) => Err(ExperimentError::Config(format!("`{}` is not a main memory; drop its case", p.id))),
        _ => Ok(()),
    }
}

/// Burst lengths actually exercised on `p`, deduplicated after clamping.
fn betas_for(t: &Topology, p: &str, betas: &[u32]) -> Result<Vec<u32>, ExperimentError> {
    let p = t.require_peripheral(p)?;
    let mut v: Vec<u32> = betas.iter().map(|&b| effective_beta(p, b)).collect();
    v.dedup();
    Ok(v)
}

fn cell_name(controller: &str, cell: &TargetCell) -> String {
    match cell.case {
        Some(c) => format!("{controller}->{}/{}", cell.peripheral, c.as_str()),
        None => format!("{controller}->{}", cell.peripheral),
    }
}

fn scenario(name: String, observed: &str, workloads: Vec<Workload>) -> Scenario {
    Scenario { name, observed: observed.to_string(), workloads, seed: None }
}

/// Isolation cells: every controller in turn, alone, one transaction in flight.
#[allow(clippy::too_many_arguments)]
pub fn isolation_suite(
    t: &Topology,
    controllers: &[String],
    cells: &[TargetCell],
    kinds: &[TransactionKind],
    betas: &[u32],
    seeds: &[u64],
    count: u64,
    jitter: u32,
    mode: HramDataMode,
) -> Result<ValidationReport, ExperimentError> {
    let mut jobs: Vec<Job> = Vec::new();
    for c in controllers {
        t.require_controller(c)?;
        for cell in cells {
            check_cell(t, cell)?;
            for &kind in kinds {
                for beta in betas_for(t, &cell.peripheral, betas)? {
                    jobs.push(Box::new(move || {
                        let name = cell_name(c, cell);
                        let w = workload(c, Mode::Isolation, &cell.peripheral, count, beta, kind.into(), pattern_for(cell.case), None, jitter);
                        let s = scenario(name.clone(), c, vec![w]);
                        let runs = per_seed(t, &s, seeds, |st| Ok(observed_service(st, c, kind, cell.case)))?;
                        let (m, seed, mism) = reduce_max(&runs)?;
                        let mut q = TransactionQuery::new(c, &cell.peripheral, kind, beta);
                        q.memory_case = cell.case;
                        q.hram_mode = mode;
                        let bound = isolation_bound(t, &q)?.total;
                        Ok((ReportRow::new("isolation", name, kind, beta, 0, 1, seed, bound.as_ps(), m), mism))
                    }));
                }
            }
        }
    }
    run_jobs(jobs)
}

/// Kinds exercised by an interference cell. Miss cells pin the kind so that
/// both sides keep the access pattern that forces the analyzed case.
fn interference_kinds(case: Option<MemoryCase>) -> Vec<TransactionKind> {
    match case {
        Some(MemoryCase::MissRefill) => vec![TransactionKind::Read],
        Some(MemoryCase::MissRefillEvict) => vec![TransactionKind::Write],
        _ => KINDS.to_vec(),
    }
}

/// Interference cells: the observed controller issues one transaction at a
/// time while every other controller keeps `phi_k` requests outstanding.
#[allow(clippy::too_many_arguments)]
pub fn interference_suite(
    t: &Topology,
    observed: &[String],
    cells: &[TargetCell],
    phis: &[u32],
    betas: &[u32],
    seeds: &[u64],
    count: u64,
    mode: HramDataMode,
) -> Result<ValidationReport, ExperimentError> {
    let mut jobs: Vec<Job> = Vec::new();
    for obs in observed {
        t.require_controller(obs)?;
        for cell in cells {
            check_cell(t, cell)?;
            for kind in interference_kinds(cell.case) {
                for &phi in phis {
                    for beta in betas_for(t, &cell.peripheral, betas)? {
                        jobs.push(Box::new(move || {
                            let mut t2 = t.clone();
                            for c in t2.controllers.iter_mut().filter(|c| &c.id != obs) {
                                c.phi_read = phi;
                                c.phi_write = phi;
                            }
                            let name = cell_name(obs, cell);
                            let pattern = pattern_for(cell.case);
                            let mix = if cell.case.is_some_and(|c| c != MemoryCase::Hit) { kind.into() } else { KindMix::Random };
                            let mut ws = vec![workload(obs, Mode::Isolation, &cell.peripheral, count, beta, kind.into(), pattern, None, 0)];
                            for c in t2.controllers.iter().filter(|c| &c.id != obs) {
                                ws.push(workload(&c.id, Mode::Interference, &cell.peripheral, 1, beta, mix, pattern, None, 0));
                            }
                            let s = scenario(name.clone(), obs, ws);
                            let runs = per_seed(&t2, &s, seeds, |st| Ok(observed_service(st, obs, kind, cell.case)))?;
                            let (m, seed, mism) = reduce_max(&runs)?;
                            let mut q = TransactionQuery::new(obs, &cell.peripheral, kind, beta);
                            q.memory_case = cell.case;
                            q.hram_mode = mode;
                            let bound = wcrt(&t2, &q)?.total;
                            Ok((ReportRow::new("interference", name, kind, beta, phi, 1, seed, bound.as_ps(), m), mism))
                        }));
                    }
                }
            }
        }
    }
    run_jobs(jobs)
}

/// Saturation cells: the first controller floods one peripheral whose input
/// FIFO is resized to each depth. Bound and measured count transactions.
pub fn parallelism_suite(
    t: &Topology,
    peripherals: &[String],
    depths: &[u32],
    beta: u32,
    outstanding: u32,
    seeds: &[u64],
    count: u64,
) -> Result<ValidationReport, ExperimentError> {
    let ctrl = t.controllers.first().ok_or_else(|| ExperimentError::Config("topology has no controller".into()))?;
    let mut jobs: Vec<Job> = Vec::new();
    for p in peripherals {
        let per = t.require_peripheral(p)?;
        let b = effective_beta(per, beta);
        let pattern = if per.main_memory().is_some() { AddressPattern::HitLoop } else { AddressPattern::Sequential };
        for &d in depths {
            for kind in KINDS {
                jobs.push(Box::new(move || {
                    let mut t2 = t.clone();
                    t2.crossbar.d_tab = t2.crossbar.d_tab.max(d);
                    t2.peripherals.iter_mut().find(|x| &x.id == p).expect("checked").set_fifo_depth(d);
                    let name = format!("{}->{p}/depth-{d}", ctrl.id);
                    let w = workload(&ctrl.id, Mode::Saturation, p, count, b, kind.into(), pattern, Some(outstanding), 0);
                    let s = scenario(name.clone(), &ctrl.id, vec![w]);
                    let runs = per_seed(&t2, &s, seeds, |st| Ok((Some(max_outstanding(st, p, kind)? as u64), 0)))?;
                    // Report the seed furthest from the depth: any overshoot first, else the shortfall.
                    let d64 = d as u64;
                    let pick = runs
                        .iter()
                        .filter_map(|&(seed, v, _)| v.map(|v| (seed, v)))
                        .max_by_key(|&(seed, v)| (v > d64, v.abs_diff(d64), std::cmp::Reverse(seed)))
                        .ok_or_else(|| ExperimentError::Config("no runs".into()))?;
                    let mut row = ReportRow::new("parallelism", name, kind, b, outstanding, 1, pick.0, d64, pick.1);
                    row.exact = true;
                    Ok((row, 0))
                }));
            }
        }
    }
    run_jobs(jobs)
}

/// Crossbar-only cells: `m` bridge-less controllers on the crossbar clock
/// request the same peripheral at the same edge; the observed one is last in
/// arbitration order. Measured is the time spent inside the crossbar.
pub fn crossbar_suite(
    t: &Topology,
    peripheral: &str,
    contenders: &[u32],
    betas: &[u32],
    seeds: &[u64],
    count: u64,
) -> Result<ValidationReport, ExperimentError> {
    t.require_peripheral(peripheral)?;
    let xclk = t.crossbar_clock()?.clone();
    let mut jobs: Vec<Job> = Vec::new();
    for &m in contenders {
        if m == 0 {
            return Err(ExperimentError::Config("crossbar suite needs at least one contender".into()));
        }
        for kind in KINDS {
            for beta in betas_for(t, peripheral, betas)? {
                let xclk = xclk.clone();
                jobs.push(Box::new(move || {
                    let mut t2 = t.clone();
                    t2.bridges.clear();
                    t2.controllers = (0..m)
                        .map(|i| ControllerModel { id: format!("x{i}"), clock: xclk.name.clone(), phi_read: 1, phi_write: 1, bridge_path: Vec::new() })
                        .collect();
                    t2.crossbar.subordinate_port_count = m;
                    let obs = format!("x{}", m - 1);
                    let pattern = match t2.require_peripheral(peripheral)?.main_memory() {
                        Some(_) => AddressPattern::HitLoop,
                        None => AddressPattern::Sequential,
                    };
                    let mut ws = vec![workload(&obs, Mode::Saturation, peripheral, count, beta, kind.into(), pattern, Some(1), 0)];
                    for i in 0..m - 1 {
                        ws.push(workload(&format!("x{i}"), Mode::Interference, peripheral, 1, beta, kind.into(), pattern, Some(1), 0));
                    }
                    let name = format!("{obs}->{peripheral}/m-{m}");
                    let s = scenario(name.clone(), &obs, ws);
                    let runs = per_seed(&t2, &s, seeds, |st| {
                        Ok((st.by_issuer(&obs).filter(|r| r.kind == kind).map(|r| r.xbar.as_ps()).max(), 0))
                    })?;
                    let (meas, seed, _) = reduce_max(&runs)?;
                    let bound = xbar_delay(kind, m, &xclk).map_err(crate::system::AnalysisError::from)?.total;
                    let mut row = ReportRow::new("crossbar", name, kind, beta, 1, 1, seed, bound.as_ps(), meas);
                    row.exact = true;
                    Ok((row, 0))
                }));
            }
        }
    }
    run_jobs(jobs)
}

/// Topology with one controller behind a CDC FIFO and a scratchpad on the
/// crossbar clock.
pub fn cdc_topology(manager_ps: u64, subordinate_ps: u64) -> Result<Topology, ExperimentError> {
    let text = format!(
        r#"{{"clocks": [{{"name": "manager", "period_ps": {manager_ps}}}, {{"name": "subordinate", "period_ps": {subordinate_ps}}}],
  "controllers": [{{"id": "m", "clock": "manager", "phi_read": 1, "phi_write": 1, "bridge_path": ["cdc"]}}],
  "bridges": [{{"kind": "cdc", "id": "cdc", "tx_clock": "manager", "rx_clock": "subordinate"}}],
  "crossbar": {{"clock": "subordinate"}},
  "peripherals": [{{"kind": "spm", "id": "spm", "clock": "subordinate", "address": {{"base": 0, "size": 65536}}}}]}}"#
    );
    Ok(parse_topology(&text)?)
}

/// CDC cells: single-word transactions across one FIFO under random clock
/// phases. Measured is the time spent in the bridge, both directions.
pub fn cdc_suite(manager_periods: &[u64], subordinate: u64, seeds: &[u64], count: u64) -> Result<ValidationReport, ExperimentError> {
    let mut jobs: Vec<Job> = Vec::new();
    for &pm in manager_periods {
        let t = cdc_topology(pm, subordinate)?;
        for kind in KINDS {
            let t = t.clone();
            jobs.push(Box::new(move || {
                let name = format!("m->spm/manager-{pm}ps-subordinate-{subordinate}ps");
                let w = workload("m", Mode::Isolation, "spm", count, 1, kind.into(), AddressPattern::Sequential, None, 8);
                let s = scenario(name.clone(), "m", vec![w]);
                let runs = per_seed(&t, &s, seeds, |st| Ok((st.records.iter().map(|r| r.bridge.as_ps()).max(), 0)))?;
                let (meas, seed, _) = reduce_max(&runs)?;
                let bound = bridge_delay(&t, "m", kind)?.total;
                let mut row = ReportRow::new("cdc", name, kind, 1, 1, 1, seed, bound.as_ps(), meas);
                row.max_gap_ps = Some(pm.max(subordinate));
                Ok((row, 0))
            }));
        }
    }
    run_jobs(jobs)
}

/// Runs one built-in suite on `t` with the parameters of `cfg`.
pub fn run_suite(t: &Topology, suite: Suite, cfg: &SuiteConfig, opts: &RunOptions) -> Result<ValidationReport, ExperimentError> {
    let controllers: Vec<String> = t.controllers.iter().map(|c| c.id.clone()).collect();
    let seeds = opts.seed_list(0);
    match suite {
        Suite::Isolation => {
            let c = &cfg.isolation;
            isolation_suite(t, &controllers, &c.cells, &KINDS, &cfg.betas, &seeds, opts.count(cfg, c.count), c.jitter_cycles, opts.hram_mode)
        }
        Suite::Interference => {
            let c = &cfg.interference;
            interference_suite(t, &controllers, &c.cells, &cfg.phis, &cfg.betas, &seeds, opts.count(cfg, c.count), opts.hram_mode)
        }
        Suite::Parallelism => {
            let c = &cfg.parallelism;
            parallelism_suite(t, &c.peripherals, &c.depths, c.beta, c.outstanding, &seeds, opts.count(cfg, c.count))
        }
        Suite::Crossbar => {
            let c = &cfg.crossbar;
            crossbar_suite(t, &c.peripheral, &c.contenders, &cfg.betas, &seeds, opts.count(cfg, c.count))
        }
        Suite::Cdc => {
            let c = &cfg.cdc;
            cdc_suite(&c.manager_periods_ps, c.subordinate_period_ps, &opts.seed_list(c.min_seeds), opts.count(cfg, c.count))
        }
    }
}

pub fn run_suites(t: &Topology, suites: &[Suite], cfg: &SuiteConfig, opts: &RunOptions) -> Result<ValidationReport, ExperimentError> {
    let reports = suites.iter().map(|&s| run_suite(t, s, cfg, opts)).collect::<Result<Vec<_>, _>>()?;
    Ok(ValidationReport::merge(reports))
}
