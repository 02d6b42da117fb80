use std::collections::BTreeMap;

use leakycav::scenario::{parse_scenario, resolve, ErrorKind, RawScenario, Source, Value};
use leakycav::schema::{specs, Kind, ParamValue};
use leakycav::units::Unit;
use proptest::prelude::*;

const FREE: &str = "kind = tdse\npotential.shape = free\npacket.k_mean = 1 natural\n";

#[test]
fn minimal_free_packet_gets_defaults() {
    let s = parse_scenario(FREE).unwrap();
    assert_eq!(s.kind, Kind::Tdse);
    assert_eq!(s.number("grid.dx"), 0.05);
    assert_eq!(s.params["grid.dx"].source, Source::Default);
    assert_eq!(s.params["packet.k_mean"].source, Source::File);
    assert_eq!(s.count("pml.exponent"), 2);
    // barrier keys do not apply to a free packet
    assert!(!s.has("potential.V0"));
    assert_eq!(s.output_dir.to_str(), Some("out/tdse"));
}

#[test]
fn every_applicable_key_is_recorded() {
    let s = parse_scenario(FREE).unwrap();
    let missing: Vec<_> = specs(Kind::Tdse)
        .iter()
        .filter(|sp| sp.when.is_none() && !s.has(sp.key) && sp.key != "output_dir")
        .map(|sp| sp.key)
        .collect();
    assert!(missing.is_empty(), "{missing:?}");
}

#[test]
fn missing_barrier_height_names_key_and_line() {
    let text = "# reference barrier\n\nkind = crosscheck\npotential.l = 1 natural\npotential.w = 0.5 natural\npacket.k_mean = 1 natural\n";
    let e = parse_scenario(text).unwrap_err();
    assert_eq!(e.kind, ErrorKind::MissingKey("potential.V0".into()));
    assert_eq!(e.line, 3);
    assert!(e.to_string().contains("potential.V0") && e.to_string().contains("line 3"));
}

#[test]
fn errors_carry_line_numbers() {
    let cases = [
        ("kind = tdse\npotential.shape = free\npacket.k_mean = 1 natural\npacket.spin = 1\n", 4),
        ("kind = tdse\npotential.shape = free\npacket.k_mean = 1 parsec\n", 3),
        ("kind = tdse\npotential.shape = free\npacket.k_mean = -1 natural\n", 3),
        ("kind = tdse\npotential.shape = free\npacket.k_mean = 1\n", 3),
        ("kind = tdse\npotential.shape = free\n\npacket.k_mean = 1 mm\n", 4),
        ("kind = tdse\npotential.shape = free\npotential.V0 = 1 natural\npacket.k_mean = 1 natural\n", 3),
        ("kind = gamow\nnucleus.E_alpha = 4.27 MeV\nnucleus.Z_daughter = 90 fm\nnucleus.A_daughter = 234\n", 3),
        ("kind = qnm\npml.exponent = 2.5\n", 2),
        ("kind = qnm\ncavity.q = 8.5\n", 2),
        ("kind = warp\n", 1),
        ("kind = gamow\nnucleus.E_alpha = 4.27 MeV\nnucleus.Z_daughter = 90\nnucleus.A_daughter = 234\nscan.E_min = 9 MeV\nscan.E_max = 4 MeV\n", 5),
    ];
    for (text, line) in cases {
        let e = parse_scenario(text).unwrap_err();
        assert_eq!(e.line, line, "{text}: {e}");
    }
}

#[test]
fn units_convert_to_canonical() {
    let text = "kind = qnm\ncavity.L = 2.757 m\nmirror.X_s = 3 uohm\nreference.f = 51085 GHz\nslab.half_width = 500 mm\n";
    let s = parse_scenario(text).unwrap();
    assert_eq!(s.number("cavity.L"), 2.757);
    assert!((s.number("mirror.X_s") - 3e-6).abs() < 1e-21);
    assert_eq!(s.number("reference.f"), 51085.0);
    assert_eq!(s.number("slab.half_width"), 0.5);
    let s = parse_scenario("kind = gamow\nnucleus.E_alpha = 4.27 MeV\nnucleus.Z_daughter = 90\nnucleus.A_daughter = 234\nnucleus.r0 = 1.2e-15 m\n").unwrap();
    assert!((s.number("nucleus.r0") - 1.2).abs() < 1e-12);
}

#[test]
fn derived_defaults_follow_inputs() {
    let s = parse_scenario("kind = friedrichs\nsystem.gamma = 0.001 natural\n").unwrap();
    assert_eq!(s.params["run.t_end"].source, Source::Derived);
    assert!((s.number("run.t_end") - 5000.0).abs() < 1e-9);
    assert!((s.number("mesh.half_width") - 0.5).abs() < 1e-15);
    let s = parse_scenario("kind = friedrichs\nsystem.gamma = 0.1 natural\n").unwrap();
    assert!((s.number("mesh.half_width") - 5.0).abs() < 1e-12);
    // an explicit value wins
    let s = parse_scenario("kind = friedrichs\nsystem.gamma = 0.1 natural\nrun.t_end = 7 natural\n").unwrap();
    assert_eq!(s.number("run.t_end"), 7.0);
}

fn word() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,11}"
}

fn key() -> impl Strategy<Value = String> {
    (word(), proptest::option::of(word())).prop_map(|(a, b)| match b {
        Some(b) => format!("{a}.{b}"),
        None => a,
    })
}

fn value() -> impl Strategy<Value = Value> {
    let units = proptest::sample::select(vec![
        None,
        Some(Unit::Fm),
        Some(Unit::Mm),
        Some(Unit::M),
        Some(Unit::Ms),
        Some(Unit::MeV),
        Some(Unit::GHz),
        Some(Unit::UOhm),
        Some(Unit::Natural),
    ]);
    let number = proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO;
    prop_oneof![
        (number, units).prop_map(|(value, unit)| Value::Number { value, unit }),
        (-1_000_000i64..1_000_000).prop_map(|n| Value::Number { value: n as f64, unit: None }),
        "[a-z][a-zA-Z0-9_/.-]{0,15}".prop_map(Value::Text),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn raw_round_trip(entries in proptest::collection::btree_map(key(), value(), 0..24)) {
        let mut raw = RawScenario::default();
        for (i, (k, v)) in entries.iter().enumerate() {
            raw.entries.insert(k.clone(), leakycav::scenario::Entry { value: v.clone(), line: i + 1 });
        }
        let text = raw.serialize();
        let back = RawScenario::parse(&text).unwrap();
        prop_assert_eq!(back.tree(), raw.tree());
        prop_assert_eq!(RawScenario::parse(&back.serialize()).unwrap().serialize(), text);
    }

    #[test]
    fn resolved_round_trip(
        v0 in 0.5f64..100.0,
        l in 0.1f64..2.0,
        w in 0.05f64..1.0,
        k in 0.1f64..5.0,
        dx_mm in 1u32..100,
    ) {
        let text = format!(
            "kind = crosscheck\npotential.V0 = {v0:?} natural\npotential.l = {l:?} natural\npotential.w = {w:?} natural\n\
             packet.k_mean = {k:?} natural\ngrid.dx = {} natural\ngrid.half_width = 20 natural\n",
            dx_mm as f64 / 1000.0
        );
        let a = parse_scenario(&text).unwrap();
        let b = parse_scenario(&a.raw.serialize()).unwrap();
        let strip = |s: &leakycav::Scenario| -> BTreeMap<String, ParamValue> {
            s.params.iter().map(|(k, p)| (k.clone(), p.value.clone())).collect()
        };
        prop_assert_eq!(strip(&a), strip(&b));
        prop_assert_eq!(a.raw.tree(), b.raw.tree());
        prop_assert_eq!(resolve(b.raw.clone()).unwrap().params, b.params);
    }
}
