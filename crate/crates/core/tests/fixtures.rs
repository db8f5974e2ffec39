//! Every claim stored with the fixtures, plus round-trips through the file
//! format and population-scaling invariance.

use propbudget::fixtures::{fixture_ids, load_fixture, scale_population};
use propbudget::io::{parse_instance_str, serialize_instance, Instance};
use propbudget::rational::Rational;
use propbudget::runner::{run_rule, Rule, RunOptions};

#[test]
fn fixture_expectations() {
    let mut failures = Vec::new();
    for id in fixture_ids() {
        let fixture = load_fixture(id).unwrap();
        for exp in &fixture.expectations {
            let result = exp.evaluate(&fixture).unwrap_or_else(|e| panic!("{id} / {}: {e}", exp.label));
            match (&exp.deviation, result.holds) {
                (None, true) | (Some(_), false) => {}
                (None, false) => failures.push(format!("{id} / {}: {}", exp.label, result.observed)),
                (Some(reason), true) => failures.push(format!(
                    "{id} / {}: marked as a known deviation ({reason}) but holds",
                    exp.label
                )),
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn fixtures_round_trip_through_the_file_format() {
    for id in fixture_ids() {
        let fixture = load_fixture(id).unwrap();
        let text = serialize_instance(&fixture.instance);
        assert_eq!(parse_instance_str(&text).unwrap(), fixture.instance, "{id}");
    }
}

#[test]
fn onetown_and_twotown_share_the_pav_outcome() {
    let small = |id: &str| {
        let e = load_fixture(id).unwrap().election().unwrap().clone();
        Instance::Cardinal(scale_population(&e, &Rational::new(1, 30000)).unwrap())
    };
    let (one, two) = (small("onetown"), small("twotown"));
    let opts = RunOptions::default();
    let a = run_rule(&one, Rule::Pav, &opts).unwrap();
    let b = run_rule(&two, Rule::Pav, &opts).unwrap();
    assert_eq!(a.tied_outcomes, b.tied_outcomes);
    assert_eq!(one.names_of(&a.outcome), ["L1", "L2", "R"]);
}

#[test]
fn full_population_towns() {
    let opts = RunOptions::default();
    for (id, rule, expected) in [
        ("onetown", Rule::EqualShares, ["L1", "L2", "L3"]),
        ("onetown", Rule::Phragmen, ["L1", "L2", "L3"]),
        ("onetown", Rule::Pav, ["L1", "L2", "R"]),
        ("twotown", Rule::EqualShares, ["L1", "L2", "R"]),
    ] {
        let inst = load_fixture(id).unwrap().instance;
        let report = run_rule(&inst, rule, &opts).unwrap();
        assert_eq!(inst.names_of(&report.outcome), expected, "{id} {rule:?}");
    }
}

/// Rules only see utility profiles and per-capita shares, so replicating
/// every voter leaves their outcomes unchanged.
#[test]
fn replication_invariance_on_block_fixtures() {
    let opts = RunOptions::default();
    for id in ["pav-ejr-r3", "priceable-vs-exhaustive", "rulex-fjr-22", "pav-fjr-6", "laminar-4", "core-empty-6", "phragmen-waste-100"] {
        let e = load_fixture(id).unwrap().election().unwrap().clone();
        for t in [2usize, 3] {
            let big = scale_population(&e, &Rational::from(t)).unwrap();
            for rule in [Rule::EqualShares, Rule::Gcr, Rule::Pav, Rule::Phragmen] {
                let base = run_rule(&Instance::Cardinal(e.clone()), rule, &opts);
                let scaled = run_rule(&Instance::Cardinal(big.clone()), rule, &opts);
                match (base, scaled) {
                    (Ok(a), Ok(b)) => {
                        assert_eq!(a.outcome, b.outcome, "{id} x{t} {rule:?}");
                        assert_eq!(a.tied_outcomes, b.tied_outcomes, "{id} x{t} {rule:?}");
                    }
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!("{id} x{t} {rule:?}: {a:?} vs {b:?}"),
                }
            }
        }
    }
}
