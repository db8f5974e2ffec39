//! Acceptance gate: one PASS/FAIL line per criterion. Criteria listed in
//! `KNOWN_FAILURES` are expected to fail; the target fails if any other
//! criterion fails or if a known failure starts passing.

mod common;

use std::time::{Duration, Instant};

use propbudget::axioms::{check_core, find_price_system, Axiom, AxiomVerdict, SearchBounds, Status};
use propbudget::equal_shares::Level;
use propbudget::fixtures::{feasible_outcomes, load_fixture, scale_population};
use propbudget::io::Instance;
use propbudget::model::Outcome;
use propbudget::rational::Rational;
use propbudget::runner::{check_axiom, run_rule, CheckOptions, Rule, RunOptions, RunReport};

type Line = Result<String, String>;
type Criterion = (&'static str, &'static str, Box<dyn Fn() -> Line>);

const KNOWN_FAILURES: &[(&str, &str)] = &[
    (
        "1.10",
        "in the two-voter profile a single voter is a solid coalition owed one seat, so {c3, c4} fails PSC",
    ),
    (
        "4",
        "no construction showing the alpha-core bound is asymptotically tight is available to reproduce",
    ),
];

fn instance(id: &str) -> Instance {
    load_fixture(id).unwrap().instance
}

fn run(inst: &Instance, rule: Rule) -> Result<RunReport, String> {
    run_rule(inst, rule, &RunOptions::default()).map_err(|e| e.to_string())
}

fn names(inst: &Instance, w: &Outcome) -> Vec<String> {
    inst.names_of(w)
}

fn outcome(inst: &Instance, ids: &[&str]) -> Outcome {
    inst.outcome_by_names(ids).unwrap()
}

fn check(inst: &Instance, axiom: Axiom, ids: &[&str]) -> Result<AxiomVerdict, String> {
    check_axiom(inst, axiom, &outcome(inst, ids), &CheckOptions::default())
        .map(|r| r.verdict)
        .map_err(|e| e.to_string())
}

fn expect(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn expect_outcome(inst: &Instance, rule: Rule, ids: &[&str]) -> Result<RunReport, String> {
    let report = run(inst, rule)?;
    let got = names(inst, &report.outcome);
    expect(got == ids, || format!("{} gives {got:?}", rule.name()))?;
    Ok(report)
}

fn expect_status(v: &AxiomVerdict, status: Status) -> Result<(), String> {
    expect(v.status == status, || format!("{} expected {status:?}, got {:?}", v.axiom, v.status))
}

fn witness_set(inst: &Instance, v: &AxiomVerdict) -> String {
    v.witness
        .as_ref()
        .map_or_else(String::new, |w| inst.format_set(w.candidates.iter()))
}

fn onetown() -> Line {
    let inst = instance("onetown");
    expect_outcome(&inst, Rule::Pav, &["L1", "L2", "R"])?;
    expect_outcome(&inst, Rule::EqualShares, &["L1", "L2", "L3"])?;
    expect_outcome(&inst, Rule::Phragmen, &["L1", "L2", "L3"])?;
    Ok("PAV {L1, L2, R}; equal shares and Phragmen {L1, L2, L3} on 90000 voters".into())
}

fn twotown() -> Line {
    let inst = instance("twotown");
    for rule in [Rule::Pav, Rule::EqualShares, Rule::Phragmen] {
        expect_outcome(&inst, rule, &["L1", "L2", "R"])?;
    }
    let small = |id: &str| {
        let e = load_fixture(id).unwrap().election().unwrap().clone();
        Instance::Cardinal(scale_population(&e, &Rational::new(1, 30000)).unwrap())
    };
    let (a, b) = (run(&small("onetown"), Rule::Pav)?, run(&small("twotown"), Rule::Pav)?);
    expect(a.tied_outcomes == b.tied_outcomes, || "PAV differs between the towns".into())?;
    let one = run(&instance("onetown"), Rule::Pav)?;
    expect(one.outcome == run(&inst, Rule::Pav)?.outcome, || "full-size PAV differs".into())?;
    Ok("all three rules {L1, L2, R}; PAV outputs coincide across towns".into())
}

fn pav_ejr_r3() -> Line {
    let inst = instance("pav-ejr-r3");
    expect_outcome(&inst, Rule::Pav, &["a1", "a2", "a3"])?;
    let v = check(&inst, Axiom::Ejr, &["a1", "a2", "a3"])?;
    expect_status(&v, Status::Violated)?;
    let voters = &v.witness.as_ref().unwrap().voters;
    expect(voters == &[8], || format!("witness voters {voters:?}"))?;
    Ok("PAV {a1, a2, a3}; EJR violated by the lone ninth voter".into())
}

fn rulex_fjr_22() -> Line {
    let inst = instance("rulex-fjr-22");
    let report = expect_outcome(&inst, Rule::EqualShares, &["c1", "c2", "c3", "c4", "c5", "c6", "c7"])?;
    let levels: Vec<Level> = report.trace.as_ref().unwrap().levels().cloned().collect();
    let mut want = vec![Level::Rho(Rational::new(1, 165)); 4];
    want.extend(vec![Level::Rho(Rational::new(1, 66)); 3]);
    expect(levels == want, || format!("levels {levels:?}"))?;
    let v = check(&inst, Axiom::Fjr, &["c1", "c2", "c3", "c4", "c5", "c6", "c7"])?;
    expect_status(&v, Status::Violated)?;
    let beta = v.witness.as_ref().and_then(|w| w.beta.clone());
    expect(beta == Some(Rational::from(5usize)), || format!("beta {beta:?}"))?;
    Ok("rho 1/165 four times then 1/66 three times; FJR violated with beta 5".into())
}

fn pav_fjr_6() -> Line {
    let inst = instance("pav-fjr-6");
    let committee = ["c1", "c2", "c3", "c7", "c8", "c9", "c10", "c11", "c12", "c13", "c14", "c15"];
    expect_outcome(&inst, Rule::Pav, &committee)?;
    let v = check(&inst, Axiom::Fjr, &committee)?;
    expect_status(&v, Status::Violated)?;
    let beta = v.witness.as_ref().and_then(|w| w.beta.clone());
    expect(beta == Some(Rational::from(4usize)), || format!("beta {beta:?}"))?;
    Ok("PAV elects the twelve-candidate committee; FJR violated with beta 4".into())
}

fn core_empty() -> Line {
    let inst = instance("core-empty-6");
    let e = inst.as_cardinal().unwrap();
    let all = feasible_outcomes(&inst).map_err(|e| e.to_string())?;
    for w in &all {
        let v = check_core(e, w, SearchBounds::default()).map_err(|e| e.to_string())?;
        expect_status(&v, Status::Violated).map_err(|m| format!("{}: {m}", w.display(e)))?;
    }
    let v = check(&inst, Axiom::Core, &["c1", "c4", "c5"])?;
    let w = v.witness.clone().unwrap_or_default();
    expect(w.voters == [1, 2] && names(&inst, &e.outcome(w.candidates).unwrap()) == ["c3"], || {
        format!("canonical witness {v:?}")
    })?;
    Ok(format!("all {} feasible outcomes blocked; v2, v3 block {{c1, c4, c5}} via c3", all.len()))
}

fn priceable_vs_exhaustive() -> Line {
    let inst = instance("priceable-vs-exhaustive");
    let e = inst.as_cardinal().unwrap();
    for ids in [&["c1"][..], &["c2", "c3"][..]] {
        let w = outcome(&inst, ids);
        expect(propbudget::axioms::check_exhaustive(e, &w).is_satisfied(), || format!("{ids:?} not exhaustive"))?;
        let ps = find_price_system(e, &w).map_err(|e| e.to_string())?;
        expect(ps.is_none(), || format!("{ids:?} has a price system"))?;
    }
    Ok("{c1} and {c2, c3} are exhaustive and have no price system".into())
}

fn nearly_laminar() -> Line {
    let inst = instance("nearly-laminar-4000");
    let start = Instant::now();
    let report = expect_outcome(
        &inst,
        Rule::Gcr,
        &["c5", "c6", "c7", "c8", "c9", "c10", "c11", "c12"],
    )?;
    let took = start.elapsed();
    expect(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    let betas: Vec<String> = report.rounds.iter().map(|r| r.beta.to_string()).collect();
    Ok(format!("GCR elects Y and Z in {:.1} s (betas {})", took.as_secs_f64(), betas.join(", ")))
}

fn ordinal_gcr() -> Line {
    let inst = instance("ordinal-gcr-12");
    expect_outcome(&inst, Rule::Gcr, &["c1", "c6", "c7", "c8"])?;
    let v = check(&inst, Axiom::Psc, &["c1", "c6", "c7", "c8"])?;
    expect_status(&v, Status::Violated)?;
    let t = witness_set(&inst, &v);
    expect(t == "{c1, c2, c3}", || format!("witness T = {t}"))?;
    Ok(format!("GCR {{c1, c6, c7, c8}} fails PSC with T = {t}"))
}

fn ordinal_incomparability() -> Line {
    let psc3 = instance("ordinal-psc-3");
    expect_status(&check(&psc3, Axiom::Psc, &["c1", "c4"])?, Status::Violated)?;
    expect_status(&check(&psc3, Axiom::Fjr, &["c1", "c4"])?, Status::Satisfied)?;
    let ejr2 = instance("ordinal-ejr-2");
    expect_status(&check(&ejr2, Axiom::EjrStrict, &["c3", "c4"])?, Status::Violated)?;
    let v = check(&ejr2, Axiom::Psc, &["c3", "c4"])?;
    expect_status(&v, Status::Satisfied).map_err(|m| {
        format!("FJR-not-PSC reproduced; PSC-not-EJR not: {m} with T = {}", witness_set(&ejr2, &v))
    })?;
    Ok("FJR without PSC and PSC without EJR both reproduced".into())
}

fn phragmen_waste() -> Line {
    expect_outcome(&instance("phragmen-waste-100"), Rule::Phragmen, &["C"])?;
    Ok("Phragmen funds only C".into())
}

fn property(f: fn(u64) -> common::Check, count: u64) -> impl Fn() -> Line {
    move || f(count).map(|n| format!("{n} seeded instances"))
}

fn alpha_core_tightness() -> Line {
    Err("tightness construction not implemented; the bound itself is checked by 2.6".into())
}

fn main() {
    use common::*;
    let criteria: Vec<Criterion> = vec![
        ("1.1", "Onetown outcomes", Box::new(onetown)),
        ("1.2", "Twotown outcomes", Box::new(twotown)),
        ("1.3", "PAV fails EJR (r = 3)", Box::new(pav_ejr_r3)),
        ("1.4", "equal shares trace and FJR failure (n = 22)", Box::new(rulex_fjr_22)),
        ("1.5", "PAV fails FJR (n = 6)", Box::new(pav_fjr_6)),
        ("1.6", "empty core", Box::new(core_empty)),
        ("1.7", "exhaustive but not priceable", Box::new(priceable_vs_exhaustive)),
        ("1.8", "GCR on the nearly laminar instance", Box::new(nearly_laminar)),
        ("1.9", "GCR with exponential utilities fails PSC", Box::new(ordinal_gcr)),
        ("1.10", "PSC incomparable with EJR and FJR", Box::new(ordinal_incomparability)),
        ("1.11", "Phragmen wastes the budget", Box::new(phragmen_waste)),
        ("2.1", "equal shares satisfies EJR", Box::new(property(rule_x_satisfies_ejr, INSTANCES))),
        ("2.2", "GCR satisfies FJR", Box::new(property(gcr_satisfies_fjr, INSTANCES))),
        ("2.3", "equal shares ledger is a price system; trace invariants", Box::new(property(rule_x_ledger_invariants, INSTANCES))),
        ("2.4", "exhaustive equal shares is exhaustive", Box::new(property(exhaustive_rule_x_is_exhaustive, INSTANCES))),
        ("2.5", "lexicographic equal shares satisfies PSC", Box::new(property(lex_rule_x_satisfies_psc, INSTANCES))),
        ("2.6", "equal shares is in the alpha-core at the bound", Box::new(property(rule_x_in_alpha_core, INSTANCES))),
        ("2.7", "FJR implies EJR", Box::new(property(fjr_implies_ejr, INSTANCES))),
        ("2.8", "GCR payments and completion are price systems", Box::new(property(gcr_payments_and_completion, INSTANCES))),
        ("3.1", "PAV equals subset enumeration (m <= 12)", Box::new(property(pav_matches_enumeration, 300))),
        ("3.2", "best beta equals group enumeration (n <= 8)", Box::new(property(best_beta_matches_enumeration, INSTANCES))),
        ("3.3", "min rho equals bisection, 1000 samples each", Box::new(property(min_rho_matches_bisection, 300))),
        ("4", "alpha-core bound tightness", Box::new(alpha_core_tightness)),
    ];
    let mut unexpected = 0;
    for (id, title, criterion) in &criteria {
        let known = KNOWN_FAILURES.iter().find(|(k, _)| k == id).map(|(_, why)| *why);
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(criterion))
            .unwrap_or_else(|_| Err("panicked".into()));
        match (result, known) {
            (Ok(detail), None) => println!("PASS {id} {title}: {detail}"),
            (Ok(detail), Some(_)) => {
                unexpected += 1;
                println!("PASS {id} {title}: {detail} (listed as a known failure)");
            }
            (Err(detail), Some(why)) => println!("FAIL {id} {title}: {detail} [known: {why}]"),
            (Err(detail), None) => {
                unexpected += 1;
                println!("FAIL {id} {title}: {detail}");
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria did not match their expected result");
        std::process::exit(1);
    }
}
