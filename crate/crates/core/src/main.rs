//! `wcrt`: bound tables, simulation runs, validation suites and sweeps.
//!
//! Exit codes: 0 success, 1 bound violation, 2 configuration error,
//! 3 simulation horizon reached.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wcrt_core::component::MemoryCase;
use wcrt_core::experiment::*;
use wcrt_core::model::*;
use wcrt_core::sim::{self, SimError, TraceStats};
use wcrt_core::system::{isolation_bound, wcrt, TransactionQuery, WcrtBound};

/// Writes a line to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

const EXIT_CONFIG: u8 = 2;
const EXIT_HORIZON: u8 = 3;

#[derive(Parser)]
#[command(name = "wcrt", version, about = "Worst-case response-time analysis for AXI interconnects")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum HramMode {
    Literal,
    Physical,
}

impl From<HramMode> for HramDataMode {
    fn from(m: HramMode) -> Self {
        match m {
            HramMode::Literal => HramDataMode::Literal,
            HramMode::Physical => HramDataMode::PhysicalCeil,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Topology JSON; the bundled reference topology when omitted.
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "physical")]
    hram_mode: HramMode,
    /// Write CSV (or the trace, for `simulate`) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct Runs {
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// First seed of the range.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Transactions per cell (overrides the suite file).
    #[arg(long)]
    count: Option<u64>,
    /// Full-scale transaction counts.
    #[arg(long)]
    full: bool,
    /// Suite parameters; the bundled ones when omitted.
    #[arg(long)]
    suites: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bound table for one controller and peripheral over a list of burst lengths.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        controller: String,
        #[arg(long)]
        peripheral: String,
        /// Both kinds when omitted.
        #[arg(long)]
        kind: Option<TransactionKind>,
        /// `1,2,4` or `a..b[/step]`; powers of two up to 256 by default.
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        memory_case: Option<MemoryCase>,
        /// Outstanding override, `controller=value`; repeatable.
        #[arg(long, value_parser = parse_phi)]
        phi: Vec<(String, u32)>,
        #[arg(long, default_value_t = 1)]
        v: u32,
        /// β of the interferers; equal to the analyzed β when omitted.
        #[arg(long)]
        interferer_beta: Option<u32>,
    },
    /// Runs one scenario and prints measured maxima.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Caps the transaction count of every non-interfering workload.
        #[arg(long)]
        count: Option<u64>,
        /// Stop after this many picoseconds of simulated time.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Runs built-in validation suites and reports bound against measured.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        runs: Runs,
        /// All suites when omitted; repeatable.
        #[arg(long, value_parser = |s: &str| s.parse::<Suite>().map_err(|e| e.to_string()))]
        suite: Vec<Suite>,
    },
    /// Bound and measured curves along one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        runs: Runs,
        #[arg(long, value_parser = |s: &str| s.parse::<Dimension>().map_err(|e| e.to_string()))]
        dimension: Dimension,
        #[arg(long)]
        range: String,
        #[arg(long)]
        controller: Option<String>,
        #[arg(long)]
        peripheral: Option<String>,
        #[arg(long)]
        kind: Option<TransactionKind>,
        #[arg(long)]
        memory_case: Option<MemoryCase>,
        #[arg(long, default_value_t = 16)]
        beta: u32,
    },
}

fn parse_phi(s: &str) -> Result<(String, u32), String> {
    let (c, v) = s.split_once('=').ok_or("expected controller=value")?;
    let v = v.parse::<u32>().map_err(|e| format!("bad value `{v}`: {e}"))?;
    Ok((c.to_string(), v))
}

/// An error carrying the exit code it maps to.
struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_CONFIG, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Analyze { common, controller, peripheral, kind, beta, memory_case, phi, v, interferer_beta } => {
            analyze(&common, &controller, &peripheral, kind, beta.as_deref(), memory_case, &phi, v, interferer_beta)
        }
        Cmd::Simulate { common, scenario, seed, count, horizon } => simulate(&common, &scenario, seed, count, horizon),
        Cmd::Validate { common, runs, suite } => validate(&common, &runs, &suite),
        Cmd::Sweep { common, runs, dimension, range, controller, peripheral, kind, memory_case, beta } => {
            let req = SweepRequest { dimension, values: Vec::new(), controller, peripheral, kind, memory_case, beta };
            sweep(&common, &runs, req, &range)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load_topology(c: &Common) -> Result<Topology, Failure> {
    let text = match &c.topology {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure(EXIT_CONFIG, format!("{}: {e}", p.display())))?,
        None => REFERENCE_TOPOLOGY.to_string(),
    };
    let t = parse_topology(&text)?;
    let v = validate_topology(&t);
    for d in &v.diagnostics {
        eprintln!("{d}");
    }
    if !v.ok {
        return Err(Failure(EXIT_CONFIG, "topology failed validation".into()));
    }
    Ok(t)
}

fn load_suites(r: &Runs) -> Result<SuiteConfig, Failure> {
    match &r.suites {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure(EXIT_CONFIG, format!("{}: {e}", p.display())))?;
            Ok(SuiteConfig::parse(&text)?)
        }
        None => Ok(SuiteConfig::reference()),
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(EXIT_CONFIG, format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(v: &T) -> Result<(), Failure> {
    out!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run_options(c: &Common, r: &Runs) -> RunOptions {
    RunOptions { seeds: r.seeds, base_seed: r.seed, count: r.count, full: r.full, hram_mode: c.hram_mode.into() }
}

#[derive(Serialize)]
struct AnalyzeRow {
    kind: TransactionKind,
    beta: u32,
    isolation_ps: u64,
    s: u64,
    u: u64,
    delta_ps: u64,
    wcrt_ps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<WcrtBound>,
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    c: &Common,
    controller: &str,
    peripheral: &str,
    kind: Option<TransactionKind>,
    beta: Option<&str>,
    case: Option<MemoryCase>,
    phi: &[(String, u32)],
    v: u32,
    interferer_beta: Option<u32>,
) -> Result<u8, Failure> {
    let mut t = load_topology(c)?;
    for (id, value) in phi {
        let ctrl = t.controller_mut(id).ok_or_else(|| Failure(EXIT_CONFIG, format!("unknown controller `{id}`")))?;
        ctrl.phi_read = *value;
        ctrl.phi_write = *value;
    }
    let betas = match beta {
        Some(r) => parse_range(r)?,
        None => (0..=8).map(|i| 1u64 << i).collect(),
    };
    let kinds = kind.map_or(vec![TransactionKind::Read, TransactionKind::Write], |k| vec![k]);
    let mut rows = Vec::new();
    for k in kinds {
        for &b in &betas {
            let b = u32::try_from(b).map_err(|_| Failure(EXIT_CONFIG, format!("burst length {b} out of range")))?;
            let mut q = TransactionQuery::new(controller, peripheral, k, b).with_v(v);
            q.memory_case = case;
            q.hram_mode = c.hram_mode.into();
            if let Some(bk) = interferer_beta {
                q = q.with_interferer_beta(bk);
            }
            let iso = isolation_bound(&t, &q)?;
            let w = wcrt(&t, &q)?;
            for warning in &w.warnings {
                eprintln!("warning: {warning}");
            }
            rows.push(AnalyzeRow {
                kind: k,
                beta: b,
                isolation_ps: iso.total.as_ps(),
                s: w.s(),
                u: w.u(),
                delta_ps: w.delta.total.as_ps(),
                wcrt_ps: w.total.as_ps(),
                bound: c.json.then_some(w),
            });
        }
    }
    let mut csv = String::from("kind,beta,isolation_ps,S,U,delta_ps,wcrt_ps\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{},{},{},{}\n", r.kind, r.beta, r.isolation_ps, r.s, r.u, r.delta_ps, r.wcrt_ps));
    }
    if let Some(p) = &c.out {
        write_out(p, &csv)?;
    }
    if c.json {
        print_json(&rows)?;
    } else {
        out!("{:<6} {:>5} {:>14} {:>4} {:>4} {:>12} {:>14}", "kind", "beta", "isolation_ps", "S", "U", "delta_ps", "wcrt_ps");
        for r in &rows {
            out!("{:<6} {:>5} {:>14} {:>4} {:>4} {:>12} {:>14}", r.kind.to_string(), r.beta, r.isolation_ps, r.s, r.u, r.delta_ps, r.wcrt_ps);
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct SimSummary<'a> {
    observed: &'a str,
    seed: u64,
    transactions: usize,
    events: u64,
    hash: &'a str,
    maxima: Vec<(String, TransactionKind, u32, u64)>,
    outstanding: &'a std::collections::BTreeMap<String, [u32; 2]>,
}

fn print_stats(stats: &TraceStats, observed: &str, seed: u64, json: bool) -> Result<(), Failure> {
    let mut issuers: Vec<&str> = stats.records.iter().map(|r| r.issuer.as_str()).collect();
    issuers.sort_unstable();
    issuers.dedup();
    let mut maxima = Vec::new();
    for i in issuers {
        for ((k, b), d) in TraceStats::maxima(stats.by_issuer(i)) {
            maxima.push((i.to_string(), k, b, d.as_ps()));
        }
    }
    let s = SimSummary {
        observed,
        seed,
        transactions: stats.records.len(),
        events: stats.events,
        hash: &stats.hash,
        maxima,
        outstanding: &stats.outstanding,
    };
    if json {
        return print_json(&s);
    }
    out!("observed {} seed {} transactions {} events {}", s.observed, s.seed, s.transactions, s.events);
    out!("trace sha256 {}", s.hash);
    out!("{:<12} {:<6} {:>5} {:>14}", "issuer", "kind", "beta", "max_ps");
    for (i, k, b, d) in &s.maxima {
        out!("{:<12} {:<6} {:>5} {:>14}", i, k.to_string(), b, d);
    }
    out!("{:<12} {:>9} {:>9}", "peripheral", "max_rd", "max_wr");
    for (p, [r, w]) in s.outstanding {
        out!("{p:<12} {r:>9} {w:>9}");
    }
    Ok(())
}

fn simulate(c: &Common, scenario: &Path, seed: Option<u64>, count: Option<u64>, horizon: Option<u64>) -> Result<u8, Failure> {
    let t = load_topology(c)?;
    let text = fs::read_to_string(scenario).map_err(|e| Failure(EXIT_CONFIG, format!("{}: {e}", scenario.display())))?;
    let s = sim::parse_scenario(&text)?;
    let seed = seed.or(s.seed).unwrap_or(0);
    let mut instance = sim::build_sim(&t, &s, seed)?;
    let (stats, code) = match sim::run(&mut instance, count, horizon.map(Duration::from_ps)) {
        Ok(stats) => (stats, 0),
        Err(SimError::Horizon(partial)) => {
            eprintln!("error: horizon reached before the scenario finished; partial results follow");
            (*partial, EXIT_HORIZON)
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(p) = &c.out {
        write_out(p, &stats.export())?;
    }
    print_stats(&stats, &s.observed, seed, c.json)?;
    Ok(code)
}

fn validate(c: &Common, r: &Runs, suites: &[Suite]) -> Result<u8, Failure> {
    let t = load_topology(c)?;
    let cfg = load_suites(r)?;
    let suites = if suites.is_empty() { Suite::ALL.to_vec() } else { suites.to_vec() };
    let report = run_suites(&t, &suites, &cfg, &run_options(c, r))?;
    if let Some(p) = &c.out {
        write_out(p, &report.to_csv())?;
    }
    if c.json {
        print_json(&report)?;
    } else {
        let s = &report.summary;
        let fmt = |p: Option<f64>| p.map_or("-".to_string(), |p| format!("{p:.4}"));
        out!("rows {} violations {} loose {} case_mismatches {}", s.rows, s.violations, s.loose, s.case_mismatches);
        out!("pessimism_pct min {} max {}", fmt(s.min_pessimism_pct), fmt(s.max_pessimism_pct));
        for row in report.rows.iter().filter(|r| !r.tight()) {
            out!(
                "{} {} {} beta={} phi_k={}: bound {} measured {}{}",
                if row.pass { "LOOSE" } else { "VIOLATION" },
                row.suite,
                row.scenario,
                row.beta,
                row.phi_k,
                row.bound_ps,
                row.measured_ps,
                if row.pass { "" } else { " (bound exceeded)" }
            );
        }
    }
    Ok(report.exit_code())
}

fn sweep(c: &Common, r: &Runs, mut req: SweepRequest, range: &str) -> Result<u8, Failure> {
    let t = load_topology(c)?;
    let cfg = load_suites(r)?;
    req.values = parse_range(range)?;
    let points = run_sweep(&t, &req, &cfg, &run_options(c, r))?;
    let csv = sweep_csv(&points);
    match &c.out {
        Some(p) => write_out(p, &csv)?,
        None if c.json => print_json(&points)?,
        None => {
            let _ = std::io::stdout().write_all(csv.as_bytes());
        }
    }
    Ok(0)
}
