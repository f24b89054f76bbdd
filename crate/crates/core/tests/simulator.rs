mod common;

use common::{two_domain, NS};
use wcrt_core::experiment::REFERENCE_TOPOLOGY;
use wcrt_core::model::*;
use wcrt_core::sim::*;
use wcrt_core::system::*;

const SATURATION: &str = include_str!("../configs/saturation_spm.json");
const ISOLATION: &str = include_str!("../configs/isolation_spm.json");

fn reference() -> Topology {
    parse_topology(REFERENCE_TOPOLOGY).unwrap()
}

fn single(ctrl: &str, target: &str, mode: Mode, kind: KindMix, beta: u32, count: u64) -> Scenario {
    Scenario {
        name: "t".into(),
        observed: ctrl.into(),
        seed: None,
        workloads: vec![Workload {
            controller: ctrl.into(),
            mode,
            target: target.into(),
            count,
            beta: BetaDist::Fixed(beta),
            kind,
            pattern: AddressPattern::Sequential,
            outstanding: None,
            jitter_cycles: 8,
        }],
    }
}

#[test]
fn same_seed_same_trace() {
    let t = reference();
    let s = parse_scenario(SATURATION).unwrap();
    let a = build_sim(&t, &s, 42).unwrap().run(None).unwrap();
    let b = build_sim(&t, &s, 42).unwrap().run(None).unwrap();
    assert_eq!(a.hash, b.hash);
    assert_eq!(a.export(), b.export());
    let c = build_sim(&t, &s, 43).unwrap().run(None).unwrap();
    assert_ne!(a.hash, c.hash);
}

#[test]
fn scenario_files_round_trip() {
    for text in [SATURATION, ISOLATION] {
        let s = parse_scenario(text).unwrap();
        assert_eq!(parse_scenario(&serialize_scenario(&s)).unwrap(), s);
    }
    assert_eq!(parse_scenario(ISOLATION).unwrap().seed, Some(7));
}

#[test]
fn bad_scenarios_rejected() {
    let t = reference();
    assert!(build_sim(&t, &single("cva6", "nowhere", Mode::Isolation, KindMix::Read, 1, 1), 0).is_err());
    assert!(build_sim(&t, &single("ghost", "spm", Mode::Isolation, KindMix::Read, 1, 1), 0).is_err());
}

#[test]
fn unknown_peripheral_in_stats() {
    let t = reference();
    let st = build_sim(&t, &single("cva6", "spm", Mode::Isolation, KindMix::Read, 1, 3), 0).unwrap().run(None).unwrap();
    assert_eq!(max_outstanding(&st, "nope", TransactionKind::Read), Err(SimError::UnknownPeripheral("nope".into())));
    assert!(matches!(max_service(&st, TransactionKind::Write, 1), Err(SimError::NoRecords { .. })));
}

#[test]
fn zero_transactions() {
    let t = reference();
    let st = build_sim(&t, &single("cva6", "spm", Mode::Isolation, KindMix::Read, 1, 0), 0).unwrap().run(None).unwrap();
    assert!(st.records.is_empty());
    assert_eq!(st.events, 0);
}

#[test]
fn horizon_returns_partial_trace() {
    let t = reference();
    let mut sim = build_sim(&t, &single("cva6", "spm", Mode::Isolation, KindMix::Read, 16, 100), 0).unwrap();
    match run(&mut sim, None, Some(Duration::from_ps(NS))) {
        Err(SimError::Horizon(partial)) => assert!(partial.records.len() < 100),
        other => panic!("expected horizon error, got {other:?}"),
    }
}

#[test]
fn count_cap() {
    let t = reference();
    let mut sim = build_sim(&t, &single("cva6", "spm", Mode::Isolation, KindMix::Read, 1, 100), 0).unwrap();
    assert_eq!(run(&mut sim, Some(7), None).unwrap().records.len(), 7);
}

#[test]
fn io_read_within_five_cycles() {
    let t = two_domain();
    let st = build_sim(&t, &single("cpu", "io", Mode::Isolation, KindMix::Read, 1, 200), 3).unwrap().run(None).unwrap();
    for r in &st.records {
        assert!((r.periph_done - r.periph_accept).as_ps() <= 5 * NS, "{r:?}");
    }
}

#[test]
fn outstanding_limits() {
    let t = reference();
    let s = parse_scenario(SATURATION).unwrap();
    let st = build_sim(&t, &s, 1).unwrap().run(None).unwrap();
    assert_eq!(max_outstanding(&st, "spm", TransactionKind::Read).unwrap(), 4);
    assert_eq!(max_outstanding(&st, "spm", TransactionKind::Write).unwrap(), 4);

    let mut llc = single("cva6", "mem", Mode::Saturation, KindMix::Read, 8, 400);
    llc.workloads[0].outstanding = Some(16);
    llc.workloads[0].pattern = AddressPattern::HitLoop;
    let st = build_sim(&t, &llc, 1).unwrap().run(None).unwrap();
    assert_eq!(max_outstanding(&st, "mem", TransactionKind::Read).unwrap(), 8);

    let st = build_sim(&t, &single("cva6", "spm", Mode::Isolation, KindMix::Alternate, 4, 100), 1).unwrap().run(None).unwrap();
    assert_eq!(max_outstanding(&st, "spm", TransactionKind::Read).unwrap(), 1);
}

#[test]
fn isolation_scenario_under_bound() {
    let t = reference();
    let mut s = parse_scenario(ISOLATION).unwrap();
    s.workloads[0].count = 2000;
    let st = build_sim(&t, &s, s.seed.unwrap()).unwrap().run(None).unwrap();
    for ((kind, beta), m) in TraceStats::maxima(st.records.iter()) {
        let b = isolation_bound(&t, &TransactionQuery::new("cva6", "spm", kind, beta)).unwrap().total;
        assert!(m <= b, "{kind} {beta}: {m:?} > {b:?}");
    }
}

#[test]
fn oracle_examples() {
    assert_eq!(brute_force_interference_count(&[4], 4, 1).unwrap(), same_type_count(&[4], 4, 1, 4).value);
    assert!(brute_force_interference_count(&[4], 4, 1).unwrap() <= 4);
    assert!(brute_force_interference_count(&[8], 4, 3).unwrap() <= 9);
    assert_eq!(brute_force_interference_count(&[], 3, 1).unwrap(), 0);
    assert_eq!(brute_force_interference_count(&[20, 10], 4, 1), Err(SimError::OracleTooLarge(35)));
}

/// Largest number of overlapping [issued, completed) intervals.
fn peak_in_flight<'a>(records: impl Iterator<Item = &'a TraceRecord>) -> usize {
    let mut edges: Vec<(u64, i32)> = records.flat_map(|r| [(r.issued.as_ps(), 1), (r.completed.as_ps(), -1)]).collect();
    // Completions sort before issues at the same instant.
    edges.sort();
    let mut cur = 0i32;
    let mut peak = 0i32;
    for (_, d) in edges {
        cur += d;
        peak = peak.max(cur);
    }
    peak as usize
}

#[test]
fn writes_complete_in_issue_order() {
    let t = reference();
    let s = parse_scenario(SATURATION).unwrap();
    for seed in 0..5 {
        let st = build_sim(&t, &s, seed).unwrap().run(None).unwrap();
        for c in ["cva6", "cluster"] {
            let mut w: Vec<&TraceRecord> = st.by_issuer(c).filter(|r| r.kind == TransactionKind::Write).collect();
            w.sort_by_key(|r| (r.issued, r.id));
            assert!(w.windows(2).all(|p| p[0].completed <= p[1].completed), "{c} seed {seed}");
        }
    }
}

#[test]
fn controller_in_flight_within_phi() {
    let t = reference();
    let s = parse_scenario(SATURATION).unwrap();
    let st = build_sim(&t, &s, 9).unwrap().run(None).unwrap();
    for kind in [TransactionKind::Read, TransactionKind::Write] {
        let cva6 = peak_in_flight(st.by_issuer("cva6").filter(|r| r.kind == kind));
        assert!(cva6 <= 16 && cva6 > 1, "{kind} {cva6}");
        let cluster = peak_in_flight(st.by_issuer("cluster").filter(|r| r.kind == kind));
        assert!(cluster <= t.controller("cluster").unwrap().phi(kind) as usize, "{kind} {cluster}");
    }
}
