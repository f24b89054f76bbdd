//! One line per acceptance criterion on the reference topology. Runs the
//! built-in suites once and judges every criterion from the shared rows.

use std::collections::BTreeMap;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wcrt_core::component::*;
use wcrt_core::experiment::*;
use wcrt_core::model::*;
use wcrt_core::sim::*;
use wcrt_core::system::*;

/// Seeds per safety cell.
const SAFETY_SEEDS: u64 = 20;
/// Allowed IO slack, in IO clock cycles.
const IO_SLACK_CYCLES: u64 = 2;
/// Observed transactions per IO isolation run.
const IO_COUNT: u64 = 2000;
/// Seeds for the plateau run; 20 leaves some phase alignments unvisited.
const PLATEAU_SEEDS: u64 = 100;
const CDC_MIN_SEEDS: u64 = 1000;
/// Upper band for SPM at β = 256 and LLC hit at β = 256, percent.
const LOW_PESSIMISM_PCT: f64 = 3.0;
/// Upper band for miss cells across the β sweep, percent.
const MISS_PESSIMISM_PCT: f64 = 28.0;
const RANDOM_DRAWS: usize = 10_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

struct Runs {
    t: Topology,
    cfg: SuiteConfig,
    isolation: ValidationReport,
    interference: ValidationReport,
    crossbar: ValidationReport,
    parallelism: ValidationReport,
    cdc: ValidationReport,
}

fn run_all() -> Runs {
    let t = parse_topology(REFERENCE_TOPOLOGY).unwrap();
    let cfg = SuiteConfig::reference();
    let opts = RunOptions { seeds: SAFETY_SEEDS, ..RunOptions::default() };
    let run = |s| run_suite(&t, s, &cfg, &opts).unwrap_or_else(|e| panic!("{s}: {e}"));
    Runs {
        isolation: run(Suite::Isolation),
        interference: run(Suite::Interference),
        crossbar: run(Suite::Crossbar),
        parallelism: run(Suite::Parallelism),
        cdc: run(Suite::Cdc),
        t,
        cfg,
    }
}

fn failing(rows: &[ReportRow], ok: impl Fn(&ReportRow) -> bool) -> Vec<String> {
    rows.iter()
        .filter(|r| !ok(r))
        .map(|r| format!("{} {} β={} φ={} bound {} measured {}", r.scenario, r.kind, r.beta, r.phi_k, r.bound_ps, r.measured_ps))
        .collect()
}

fn summarize(bad: &[String], total: usize) -> String {
    match bad.first() {
        None => format!("{total} cells"),
        Some(first) => format!("{} of {total} cells fail, first: {first}", bad.len()),
    }
}

fn safety(r: &Runs) -> Verdict {
    let rows: Vec<ReportRow> = r.isolation.rows.iter().chain(&r.interference.rows).cloned().collect();
    let bad = failing(&rows, |row| row.pass);
    let cases = [MemoryCase::Hit, MemoryCase::MissRefill, MemoryCase::MissRefillEvict];
    let covered = cases.iter().all(|c| rows.iter().any(|row| row.scenario.ends_with(&format!("/{}", c.as_str()))));
    let phis: Vec<u32> = r.cfg.phis.clone();
    let phi_covered = phis.iter().all(|p| r.interference.rows.iter().any(|row| row.phi_k == *p));
    let beta_covered = r.cfg.betas.iter().all(|b| rows.iter().any(|row| row.beta == *b));
    let mismatches = r.isolation.summary.case_mismatches + r.interference.summary.case_mismatches;
    verdict(
        bad.is_empty() && covered && phi_covered && beta_covered,
        format!("{}, {SAFETY_SEEDS} seeds, {mismatches} off-case transactions excluded", summarize(&bad, rows.len())),
    )
}

fn crossbar(r: &Runs) -> Verdict {
    let rows = &r.crossbar.rows;
    let bad = failing(rows, |row| row.gap() == 0);
    let ms: Vec<&str> = ["m-1", "m-2", "m-4"].into_iter().filter(|m| rows.iter().any(|row| row.scenario.ends_with(m))).collect();
    verdict(bad.is_empty() && ms.len() == 3, summarize(&bad, rows.len()))
}

/// Longest accept-to-done time at the IO subsystem, per kind, over isolation runs.
fn io_service(t: &Topology, kind: TransactionKind) -> u64 {
    let mut worst = 0;
    for c in &t.controllers {
        let s = Scenario {
            name: format!("{}->io", c.id),
            observed: c.id.clone(),
            seed: None,
            workloads: vec![Workload {
                controller: c.id.clone(),
                mode: Mode::Isolation,
                target: "io".into(),
                count: IO_COUNT,
                beta: BetaDist::Fixed(1),
                kind: kind.into(),
                pattern: AddressPattern::Sequential,
                outstanding: None,
                jitter_cycles: 8,
            }],
        };
        for seed in 0..SAFETY_SEEDS {
            let st = build_sim(t, &s, seed).unwrap().run(None).unwrap();
            worst = st.records.iter().map(|r| (r.periph_done - r.periph_accept).as_ps()).fold(worst, u64::max);
        }
    }
    worst
}

fn io(r: &Runs) -> Verdict {
    let p = r.t.peripheral("io").unwrap();
    let period = r.t.require_clock(&p.clock).unwrap().period.as_ps();
    let tm = specialize_peripheral(&r.t, p, 1, None, HramDataMode::default()).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (kind, cycles) in [(TransactionKind::Write, 4), (TransactionKind::Read, 5)] {
        let b = tm.service_bound(kind, 1).as_ps();
        let m = io_service(&r.t, kind);
        ok &= b == cycles * period && m <= b && b - m <= IO_SLACK_CYCLES * period;
        detail.push(format!("{kind} bound {} cycles measured {}", b / period, m as f64 / period as f64));
    }
    let rows: Vec<ReportRow> = r.isolation.rows.iter().filter(|row| row.scenario.ends_with("->io")).cloned().collect();
    let bad = failing(&rows, |row| row.pass);
    ok &= bad.is_empty() && !rows.is_empty();
    let slack: Vec<String> = rows.iter().map(|row| format!("{} {} {:.1}", row.scenario, row.kind, row.gap() as f64 / period as f64)).collect();
    verdict(ok, format!("{}; end-to-end slack in cycles: {}", detail.join(", "), slack.join(", ")))
}

fn cdc(r: &Runs) -> Verdict {
    let rows = &r.cdc.rows;
    // The suite runs max(seeds, min_seeds) phase seeds per clock pair.
    let seeds = r.cfg.cdc.min_seeds.max(SAFETY_SEEDS);
    let bad = failing(rows, |row| row.pass && row.max_gap_ps.is_some_and(|g| row.gap() <= g as i128));
    let ok = bad.is_empty() && seeds >= CDC_MIN_SEEDS && !rows.is_empty();
    verdict(ok, format!("{seeds} seeds per pair, {}", summarize(&bad, rows.len())))
}

/// Isolation pessimism by (scenario, kind), ordered by β.
fn series(r: &Runs, suffix: &str) -> BTreeMap<(String, TransactionKind), Vec<(u32, f64)>> {
    let mut m: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for row in r.isolation.rows.iter().filter(|row| row.scenario.ends_with(suffix)) {
        m.entry((row.scenario.clone(), row.kind)).or_default().push((row.beta, row.pessimism_pct));
    }
    for v in m.values_mut() {
        v.sort_by_key(|p| p.0);
    }
    m
}

fn trends(r: &Runs) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for ((s, k), v) in series(r, "->spm") {
        let tail: Vec<f64> = v.iter().filter(|p| p.0 >= 16).map(|p| p.1).collect();
        let mono = tail.windows(2).all(|w| w[1] <= w[0]);
        let last = *tail.last().unwrap();
        ok &= mono && last <= LOW_PESSIMISM_PCT;
        notes.push(format!("{s} {k} {:.2}%→{last:.2}%", tail[0]));
    }
    for ((s, k), v) in series(r, "/hit") {
        let last = v.last().unwrap().1;
        ok &= v.last().unwrap().0 == 256 && last <= LOW_PESSIMISM_PCT;
        notes.push(format!("{s} {k} {last:.2}%"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for suffix in ["/miss_refill", "/miss_refill_evict"] {
        for v in series(r, suffix).values() {
            for &(_, p) in v {
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
    }
    ok &= lo > 0.0 && hi <= MISS_PESSIMISM_PCT;
    notes.push(format!("miss {lo:.2}%..{hi:.2}%"));
    verdict(ok, notes.join("; "))
}

fn parallelism(r: &Runs) -> Verdict {
    let rows = &r.parallelism.rows;
    let bad = failing(rows, |row| row.gap() == 0);
    let per = ["spm", "io", "mem"].iter().all(|p| rows.iter().filter(|row| row.scenario.contains(&format!("->{p}/"))).count() >= 3);
    verdict(bad.is_empty() && per, summarize(&bad, rows.len()))
}

/// Measured maxima grouped by (scenario, kind, β) over the φ values above χ.
fn plateau_groups(t: &Topology, rows: &[ReportRow]) -> BTreeMap<(String, TransactionKind, u32), Vec<u64>> {
    let mut groups: BTreeMap<_, Vec<u64>> = BTreeMap::new();
    for row in rows {
        let p = row.scenario.split("->").nth(1).unwrap().split('/').next().unwrap();
        if row.phi_k > t.peripheral(p).unwrap().fifo_depth(row.kind) {
            groups.entry((row.scenario.clone(), row.kind, row.beta)).or_default().push(row.measured_ps);
        }
    }
    groups.retain(|_, v| v.len() > 1);
    groups
}

fn differing(groups: &BTreeMap<(String, TransactionKind, u32), Vec<u64>>) -> Vec<String> {
    groups
        .iter()
        .filter(|(_, v)| v.iter().any(|m| *m != v[0]))
        .map(|((s, k, b), v)| format!("{s} {k} β={b}: {v:?}"))
        .collect()
}

fn plateau(r: &Runs) -> Verdict {
    let shared = differing(&plateau_groups(&r.t, &r.interference.rows));
    let cells: Vec<TargetCell> = r.cfg.interference.cells.iter().filter(|c| c.case.is_none()).cloned().collect();
    let controllers: Vec<String> = r.t.controllers.iter().map(|c| c.id.clone()).collect();
    let seeds: Vec<u64> = (0..PLATEAU_SEEDS).collect();
    let count = r.cfg.interference.count.unwrap_or(r.cfg.count);
    let rep = interference_suite(&r.t, &controllers, &cells, &r.cfg.phis, &r.cfg.betas, &seeds, count, HramDataMode::default()).unwrap();
    let groups = plateau_groups(&r.t, &rep.rows);
    let bad = differing(&groups);
    verdict(
        bad.is_empty() && !groups.is_empty(),
        format!(
            "{} groups at {PLATEAU_SEEDS} seeds, {} differ{}; {} differ at {SAFETY_SEEDS} seeds",
            groups.len(),
            bad.len(),
            bad.first().map(|b| format!(", first: {b}")).unwrap_or_default(),
            shared.len()
        ),
    )
}

fn oracle() -> Verdict {
    let mut grid = 0;
    let mut bad = Vec::new();
    let mut sets: Vec<Vec<u32>> = vec![vec![]];
    for a in 0..=8 {
        sets.push(vec![a]);
        for b in 0..=8 {
            sets.push(vec![a, b]);
        }
    }
    for phis in &sets {
        for chi in 1..=8 {
            for v in 1..=4 {
                let brute = brute_force_interference_count(phis, chi, v).unwrap();
                let bound = same_type_count(phis, chi, v, v).value;
                grid += 1;
                if brute > bound {
                    bad.push(format!("φ={phis:?} χ={chi} V={v}: {brute} > {bound}"));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut differ = 0;
    for _ in 0..RANDOM_DRAWS {
        let n = rng.gen_range(0..=8);
        let phis: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=256)).collect();
        let chi = rng.gen_range(1..=256);
        let own = rng.gen_range(1..=256);
        if same_type_count(&phis, chi, 1, own).value != same_type_count_v1(&phis, chi) {
            differ += 1;
        }
    }
    verdict(
        bad.is_empty() && differ == 0,
        format!("{grid} grid points, {} unsound; {RANDOM_DRAWS} draws, {differ} differ{}", bad.len(), bad.first().map(|b| format!(", first: {b}")).unwrap_or_default()),
    )
}

fn determinism(r: &Runs) -> Verdict {
    let s = parse_scenario(include_str!("../configs/saturation_spm.json")).unwrap();
    let hashes: Vec<String> = (0..2).map(|_| build_sim(&r.t, &s, 5).unwrap().run(None).unwrap().hash).collect();
    let opts = RunOptions { seeds: 3, count: Some(100), ..RunOptions::default() };
    let csv = || run_suites(&r.t, &Suite::ALL, &r.cfg, &opts).unwrap().to_csv();
    let (a, b) = (csv(), csv());
    verdict(hashes[0] == hashes[1] && a == b, format!("trace {}, suite CSV {} bytes", &hashes[0][..16], a.len()))
}

fn main() -> ExitCode {
    let runs = run_all();
    let results = [
        ("1 safety", safety(&runs)),
        ("2 crossbar exactness", crossbar(&runs)),
        ("3 io bounds", io(&runs)),
        ("4 cdc slack", cdc(&runs)),
        ("5 pessimism trends", trends(&runs)),
        ("6 parallelism", parallelism(&runs)),
        ("7 saturation plateau", plateau(&runs)),
        ("8 oracle soundness", oracle()),
        ("9 determinism", determinism(&runs)),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
