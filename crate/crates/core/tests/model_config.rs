mod common;

use common::{two_domain, minimal, TWO_DOMAIN_1NS, MINIMAL};
use proptest::prelude::*;
use wcrt_core::experiment::REFERENCE_TOPOLOGY;
use wcrt_core::model::*;

#[test]
fn minimal_parses_and_validates() {
    let t = minimal();
    assert_eq!(t.controllers.len(), 1);
    assert_eq!(t.peripherals.len(), 1);
    let v = validate_topology(&t);
    assert!(v.ok, "{:?}", v.diagnostics);
    assert_eq!(t.route(0x10), Some("spm"));
    assert_eq!(t.route(4096), None);
}

#[test]
fn two_domain_has_three_peripherals() {
    let t = two_domain();
    let ids: Vec<_> = t.peripherals.iter().map(|p| p.id.as_str()).collect();
    assert_eq!(ids, ["spm", "io", "mem"]);
    assert!(validate_topology(&t).ok);
}

#[test]
fn reference_topology_is_valid() {
    let t = parse_topology(REFERENCE_TOPOLOGY).unwrap();
    let v = validate_topology(&t);
    assert_eq!(v.errors().count(), 0, "{:?}", v.diagnostics);
}

#[test]
fn duplicate_id_rejected() {
    let text = MINIMAL.replace(
        r#""peripherals": ["#,
        r#""peripherals": [{"kind": "io", "id": "cpu", "clock": "clk", "address": {"base": 65536, "size": 16}},"#,
    );
    assert_eq!(parse_topology(&text).unwrap_err(), ModelError::DuplicateId("cpu".into()));
}

#[test]
fn syntax_errors_carry_position() {
    match parse_topology("{\n  \"clocks\": [,]\n}").unwrap_err() {
        ModelError::Syntax { line, .. } => assert_eq!(line, 2),
        e => panic!("unexpected {e:?}"),
    }
    assert!(matches!(parse_topology(r#"{"clocks": [], "bogus": 1}"#), Err(ModelError::UnknownField { .. })));
}

#[test]
fn small_w_table_is_an_error() {
    let text = MINIMAL
        .replace(r#""crossbar": {"clock": "clk"}"#, r#""crossbar": {"clock": "clk", "d_tab": 2}"#)
        .replace(r#""kind": "spm", "id""#, r#""kind": "spm", "fifo_depth": 8, "id""#);
    let v = validate_topology(&parse_topology(&text).unwrap());
    assert!(!v.ok);
    assert!(v.errors().any(|d| d.message.starts_with("crossbar W-table smaller than peripheral write parallelism")));
}

#[test]
fn overlap_names_both_peripherals() {
    let text = MINIMAL.replace(
        r#""peripherals": ["#,
        r#""peripherals": [{"kind": "io", "id": "uart", "clock": "clk", "address": {"base": 2048, "size": 16}},"#,
    );
    let text = text.replace(r#""crossbar": {"clock": "clk"}"#, r#""crossbar": {"clock": "clk", "manager_port_count": 2}"#);
    let v = validate_topology(&parse_topology(&text).unwrap());
    let msg = v.errors().find(|d| d.message.contains("overlap")).expect("overlap reported");
    assert!(msg.message.contains("`uart`") && msg.message.contains("`spm`"), "{msg}");
}

#[test]
fn unknown_clock_reported() {
    let text = MINIMAL.replace(r#""id": "cpu", "clock": "clk""#, r#""id": "cpu", "clock": "nope""#);
    let v = validate_topology(&parse_topology(&text).unwrap());
    assert!(v.errors().any(|d| d.id == "cpu" && d.message == "unknown clock `nope`"));
}

#[test]
fn bridge_on_no_path_reported() {
    let mut t = two_domain();
    t.controller_mut("acc").unwrap().bridge_path.clear();
    let v = validate_topology(&t);
    assert!(v.errors().any(|d| d.message == "bridge is not on any controller's path"));
}

#[test]
fn round_trip_fixtures() {
    for text in [MINIMAL, TWO_DOMAIN_1NS, REFERENCE_TOPOLOGY] {
        let t = parse_topology(text).unwrap();
        assert_eq!(parse_topology(&serialize_topology(&t)).unwrap(), t);
    }
}

proptest! {
    #[test]
    fn round_trip_mutated(
        period in 1u64..100_000,
        phi_r in 1u32..32,
        phi_w in 1u32..32,
        depth in 1u32..16,
        d_tab in 1u32..64,
    ) {
        let mut t = two_domain();
        t.clocks[0].period = Duration::from_ps(period);
        let c = t.controller_mut("cpu").unwrap();
        c.set_phi(TransactionKind::Read, phi_r);
        c.set_phi(TransactionKind::Write, phi_w);
        t.peripheral_mut("spm").unwrap().set_fifo_depth(depth);
        t.crossbar.d_tab = d_tab;
        let back = parse_topology(&serialize_topology(&t)).unwrap();
        prop_assert_eq!(back, t);
    }
}
