mod common;

use common::{two_domain, oracle};
use proptest::prelude::*;
use wcrt_core::component::*;
use wcrt_core::experiment::{format_pessimism, ReportRow, ValidationReport, REFERENCE_TOPOLOGY};
use wcrt_core::model::*;
use wcrt_core::sim::*;
use wcrt_core::system::*;

fn kind() -> impl Strategy<Value = TransactionKind> {
    prop_oneof![Just(TransactionKind::Read), Just(TransactionKind::Write)]
}

fn case() -> impl Strategy<Value = MemoryCase> {
    prop_oneof![Just(MemoryCase::Hit), Just(MemoryCase::MissRefill), Just(MemoryCase::MissRefillEvict)]
}

fn reference() -> Topology {
    parse_topology(REFERENCE_TOPOLOGY).unwrap()
}

fn query(ctrl: &str, p: &str, k: TransactionKind, beta: u32, c: MemoryCase) -> TransactionQuery {
    let q = TransactionQuery::new(ctrl, p, k, beta);
    if p == "mem" {
        q.with_case(c)
    } else {
        q
    }
}

fn periph() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("spm"), Just("io"), Just("mem")]
}

proptest! {
    #[test]
    fn clock_scaling_is_homogeneous(
        k in 2u64..7,
        ctrl in prop_oneof![Just("cva6"), Just("cluster")],
        p in periph(),
        kd in kind(),
        beta in 1u32..=256,
        c in case(),
    ) {
        let t = reference();
        let mut scaled = t.clone();
        for clk in &mut scaled.clocks {
            clk.period = Duration::from_ps(clk.period.as_ps() * k);
        }
        let q = query(ctrl, p, kd, beta, c);
        let a = wcrt(&t, &q).unwrap().total;
        let b = wcrt(&scaled, &q).unwrap().total;
        prop_assert_eq!(b.as_ps(), k * a.as_ps());
    }

    #[test]
    fn monotone_in_beta(p in periph(), kd in kind(), beta in 1u32..256, c in case()) {
        let t = reference();
        let lo = wcrt(&t, &query("cva6", p, kd, beta, c)).unwrap().total;
        let hi = wcrt(&t, &query("cva6", p, kd, beta + 1, c)).unwrap().total;
        prop_assert!(lo <= hi);
    }

    #[test]
    fn monotone_in_interferer_phi(p in periph(), kd in kind(), beta in 1u32..=64, c in case(), phi in 1u32..32) {
        let mut t = reference();
        let q = query("cva6", p, kd, beta, c);
        t.controller_mut("cluster").unwrap().set_phi(kd, phi);
        let lo = wcrt(&t, &q).unwrap().total;
        t.controller_mut("cluster").unwrap().set_phi(kd, phi + 1);
        let hi = wcrt(&t, &q).unwrap().total;
        prop_assert!(lo <= hi);
    }

    #[test]
    fn monotone_in_v(p in periph(), kd in kind(), beta in 1u32..=64, c in case(), v in 1u32..4) {
        let t = two_domain();
        let lo = wcrt(&t, &query("cpu", p, kd, beta, c).with_v(v)).unwrap().total;
        let hi = wcrt(&t, &query("cpu", p, kd, beta, c).with_v(v + 1)).unwrap().total;
        prop_assert!(lo <= hi);
    }

    #[test]
    fn hmc_write_never_slower(hmc in 1u64..20_000, hram in 1u64..20_000) {
        let a = ClockDomain::new("a", Duration::from_ps(hmc));
        let b = ClockDomain::new("b", Duration::from_ps(hram));
        let r = hmc_ctrl(TransactionKind::Read, &a, &b).total;
        let w = hmc_ctrl(TransactionKind::Write, &a, &b).total;
        prop_assert!(w <= r);
        prop_assert_eq!(r.as_ps(), oracle::hmc(true, hmc, hram));
        prop_assert_eq!(w.as_ps(), oracle::hmc(false, hmc, hram));
    }

    #[test]
    fn single_transaction_form_agrees(phis in prop::collection::vec(0u32..64, 0..6), chi in 1u32..32) {
        let own = 1;
        let c = same_type_count(&phis, chi, 1, own);
        prop_assert_eq!(c.value, same_type_count_v1(&phis, chi));
        prop_assert_eq!(c.value, c.alternate);
        prop_assert_eq!(c.value, oracle::same_type(&phis.iter().map(|&p| p as u64).collect::<Vec<_>>(), chi as u64, 1));
    }

    #[test]
    fn independent_paths_have_no_cross_type(s in 0u64..1_000_000) {
        prop_assert_eq!(cross_type_interference_count(s, 1), 0);
        prop_assert_eq!(cross_type_interference_count(s, 0), s + 1);
    }

    #[test]
    fn csv_pessimism_recomputes(bound in 1u64..10_000_000, measured in 1u64..10_000_000) {
        let row = ReportRow::new("x", "s".into(), TransactionKind::Read, 1, 1, 1, 0, bound, measured);
        let csv = ValidationReport::new(vec![row], 0).to_csv();
        let mut rd = csv::Reader::from_reader(csv.as_bytes());
        let rec = rd.records().next().unwrap().unwrap();
        let b: f64 = rec[7].parse().unwrap();
        let m: f64 = rec[8].parse().unwrap();
        let p: f64 = rec[9].parse().unwrap();
        prop_assert!((100.0 * (b - m) / m - p).abs() <= 5e-5 + 1e-9 * p.abs());
        prop_assert_eq!(&rec[10], if measured <= bound { "true" } else { "false" });
        let exact = pessimism_pct(Duration::from_ps(bound), Duration::from_ps(measured)).unwrap();
        prop_assert_eq!(p, format_pessimism(exact));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_stays_under_bound(
        p in prop_oneof![Just("spm"), Just("io")],
        kd in kind(),
        beta in prop::sample::select(vec![1u32, 2, 4, 8, 16, 32]),
        beta_k in prop::sample::select(vec![1u32, 4, 16, 64]),
        phi in 1u32..8,
        seed in any::<u64>(),
    ) {
        let mut t = two_domain();
        t.controller_mut("cpu").unwrap().set_phi(TransactionKind::Read, phi);
        t.controller_mut("cpu").unwrap().set_phi(TransactionKind::Write, phi);
        let w = |c: &str, mode, b, k: KindMix, n| Workload {
            controller: c.into(),
            mode,
            target: p.into(),
            count: n,
            beta: BetaDist::Fixed(b),
            kind: k,
            pattern: AddressPattern::Sequential,
            outstanding: None,
            jitter_cycles: 4,
        };
        let s = Scenario {
            name: "prop".into(),
            observed: "acc".into(),
            seed: None,
            workloads: vec![
                w("acc", Mode::Isolation, beta, kd.into(), 30),
                w("cpu", Mode::Interference, beta_k, KindMix::Random, 30),
            ],
        };
        let st = build_sim(&t, &s, seed).unwrap().run(None).unwrap();
        let b = effective_beta(t.peripheral(p).unwrap(), beta);
        let measured = st.by_issuer("acc").filter(|r| r.kind == kd).map(|r| r.service()).max().unwrap();
        let q = TransactionQuery::new("acc", p, kd, b).with_interferer_beta(beta_k);
        let bound = wcrt(&t, &q).unwrap().total;
        prop_assert!(measured <= bound, "measured {measured:?} bound {bound:?}");
    }
}
