//! Seeded instance streams and the property and oracle checks shared by the
//! `properties`, `oracles` and `acceptance` targets. Each check returns the
//! number of instances examined, or a description of the first failure.
#![allow(dead_code)]

use rand::Rng;

use propbudget::axioms::{
    alpha_core_bound, check_alpha_core, check_ejr, check_exhaustive, check_fjr, verify_price_system,
    verify_price_system_partial, SearchBounds,
};
use propbudget::baselines::run_pav;
use propbudget::equal_shares::{min_rho, run_rule_x, run_rule_x_exhaustive, PaymentLedger, TieBreak};
use propbudget::gcr::{best_beta_for_bundle, gcr_payment_construction, gcr_priceable_completion, run_gcr, GcrBounds};
use propbudget::generate::{
    approval_election, cardinal_election, clustered_ranked_election, ranked_election, rng, unit_cost_election,
};
use propbudget::model::{CandidateId, Election, Outcome, VoterId};
use propbudget::ordinal::{check_psc, run_rule_x_lex, RankedElection};
use propbudget::rational::Rational;

pub type Check = Result<usize, String>;

pub const INSTANCES: u64 = 1000;

/// Approval, unit-cost and cardinal instances in rotation, `n, m <= 8`.
pub fn election(seed: u64) -> Election {
    let mut r = rng(seed);
    let n = r.random_range(1..=8);
    let m = r.random_range(1..=8);
    let density = r.random_range(0.2..0.8);
    match seed % 3 {
        0 => approval_election(&mut r, n, m, density),
        1 => {
            let k = r.random_range(1..=m);
            unit_cost_election(&mut r, n, m, k, density)
        }
        _ => cardinal_election(&mut r, n, m, density),
    }
}

pub fn ranked(seed: u64) -> RankedElection {
    let mut r = rng(seed);
    let n = r.random_range(1..=8);
    let m = r.random_range(1..=8);
    let k = r.random_range(1..=m);
    if seed.is_multiple_of(2) {
        ranked_election(&mut r, n, m, k)
    } else {
        let clusters = r.random_range(1..=3);
        clustered_ranked_election(&mut r, n, m, k, clusters)
    }
}

/// A random feasible outcome: candidates in random order, kept while they fit.
pub fn random_outcome(e: &Election, seed: u64) -> Outcome {
    let mut r = rng(seed ^ 0x5eed);
    let mut left = Rational::one();
    let mut chosen = Vec::new();
    for c in 0..e.m() {
        if r.random_bool(0.5) && e.cost(c) <= &left {
            left -= e.cost(c);
            chosen.push(c);
        }
    }
    e.outcome(chosen).unwrap()
}

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

fn describe(e: &Election, seed: u64) -> String {
    let rows: Vec<String> = (0..e.n())
        .map(|i| {
            let parts: Vec<String> = e.liked(i).iter().map(|&c| format!("{}:{}", e.name(c), e.utility(i, c))).collect();
            parts.join(" ")
        })
        .collect();
    let costs: Vec<String> = e.costs().iter().map(|c| c.to_string()).collect();
    format!("seed {seed}, costs [{}], ballots [{}]", costs.join(", "), rows.join(" | "))
}

fn all_seeds(count: u64, mut f: impl FnMut(u64) -> Result<(), String>) -> Check {
    for seed in 0..count {
        f(seed)?;
    }
    Ok(count as usize)
}

pub fn rule_x_satisfies_ejr(count: u64) -> Check {
    all_seeds(count, |seed| {
        let e = election(seed);
        let w = run_rule_x(&e, TieBreak::LowestIndex).outcome;
        let v = check_ejr(&e, &w, bounds()).map_err(|err| err.to_string())?;
        if v.is_satisfied() {
            Ok(())
        } else {
            Err(format!("{}: {} gives {v:?}", describe(&e, seed), w.display(&e)))
        }
    })
}

pub fn gcr_satisfies_fjr(count: u64) -> Check {
    all_seeds(count, |seed| {
        let e = election(seed);
        let w = run_gcr(&e, GcrBounds::default()).map_err(|err| err.to_string())?.outcome;
        let v = check_fjr(&e, &w, bounds()).map_err(|err| err.to_string())?;
        if v.is_satisfied() {
            Ok(())
        } else {
            Err(format!("{}: {} gives {v:?}", describe(&e, seed), w.display(&e)))
        }
    })
}

/// Ledger re-verification, level monotonicity, payments summing to costs
/// and non-negative balances, all on the same Rule X runs.
pub fn rule_x_ledger_invariants(count: u64) -> Check {
    all_seeds(count, |seed| {
        let e = election(seed);
        let out = run_rule_x(&e, TieBreak::LowestIndex);
        let fail = |what: &str| Err(format!("{}: {what}", describe(&e, seed)));
        let v = verify_price_system(&e, &out.outcome, &out.ledger.to_price_system(Rational::one()))
            .map_err(|err| err.to_string())?;
        if !v.is_satisfied() {
            return fail(&format!("ledger rejected: {v:?}"));
        }
        if !out.trace.is_monotone() {
            return fail("levels decrease");
        }
        for step in &out.trace.steps {
            let paid = step.payments.iter().fold(Rational::zero(), |acc, (_, x)| acc + x);
            if &paid != e.cost(step.candidate) {
                return fail(&format!("{} paid {paid}", e.name(step.candidate)));
            }
        }
        for c in out.outcome.iter() {
            if &out.ledger.paid_for(*c) != e.cost(*c) {
                return fail(&format!("ledger pays {} for {}", out.ledger.paid_for(*c), e.name(*c)));
            }
        }
        if out.ledger.remaining_all().iter().any(Rational::is_negative) {
            return fail("negative balance");
        }
        Ok(())
    })
}

pub fn exhaustive_rule_x_is_exhaustive(count: u64) -> Check {
    all_seeds(count, |seed| {
        let e = election(seed);
        let out = run_rule_x_exhaustive(&e, TieBreak::LowestIndex).map_err(|err| err.to_string())?;
        let v = check_exhaustive(&e, &out.run.outcome);
        if v.is_satisfied() {
            Ok(())
        } else {
            Err(format!("{}: {} gives {v:?}", describe(&e, seed), out.run.outcome.display(&e)))
        }
    })
}

pub fn lex_rule_x_satisfies_psc(count: u64) -> Check {
    all_seeds(count, |seed| {
        let re = ranked(seed);
        let w = run_rule_x_lex(&re, TieBreak::LowestIndex).outcome;
        let v = check_psc(&re, &w).map_err(|err| err.to_string())?;
        if v.is_satisfied() {
            Ok(())
        } else {
            Err(format!("seed {seed}: {re:?} elects {} and gives {v:?}", re.format_set(w.iter())))
        }
    })
}

pub fn rule_x_in_alpha_core(count: u64) -> Check {
    all_seeds(count, |seed| {
        let e = election(seed);
        let w = run_rule_x(&e, TieBreak::LowestIndex).outcome;
        let alpha = alpha_core_bound(&e);
        let v = check_alpha_core(&e, &w, &alpha, bounds()).map_err(|err| err.to_string())?;
        if v.is_satisfied() {
            Ok(())
        } else {
            Err(format!("{}: alpha {alpha}, {v:?}", describe(&e, seed)))
        }
    })
}

/// On rule outputs and random feasible outcomes, an FJR verdict of
/// "satisfied" is never contradicted by EJR.
pub fn fjr_implies_ejr(count: u64) -> Check {
    let mut violated = 0;
    let checked = all_seeds(count, |seed| {
        let e = election(seed);
        let candidates = [
            random_outcome(&e, seed),
            run_rule_x(&e, TieBreak::LowestIndex).outcome,
            Outcome::empty(),
        ];
        for w in candidates {
            let fjr = check_fjr(&e, &w, bounds()).map_err(|err| err.to_string())?;
            let ejr = check_ejr(&e, &w, bounds()).map_err(|err| err.to_string())?;
            if fjr.is_satisfied() && !ejr.is_satisfied() {
                return Err(format!("{}: {} FJR holds but {ejr:?}", describe(&e, seed), w.display(&e)));
            }
            violated += usize::from(ejr.is_violated());
        }
        Ok(())
    })?;
    // The implication is vacuous unless the checkers do reject something.
    if violated * 20 < checked {
        return Err(format!("only {violated} EJR violations among {checked} instances"));
    }
    Ok(checked)
}

pub fn gcr_payments_and_completion(count: u64) -> Check {
    all_seeds(count, |seed| {
        let e = election(seed);
        let out = run_gcr(&e, GcrBounds::default()).map_err(|err| err.to_string())?;
        let ledger = gcr_payment_construction(&e, &out.rounds).map_err(|err| format!("seed {seed}: {err}"))?;
        let partial = verify_price_system_partial(&e, &out.outcome, &ledger.to_price_system(Rational::one()))
            .map_err(|err| err.to_string())?;
        if !partial.is_satisfied() {
            return Err(format!("{}: construction fails C1-C4: {partial:?}", describe(&e, seed)));
        }
        let done = gcr_priceable_completion(&e, &out.outcome, ledger, TieBreak::LowestIndex)
            .map_err(|err| format!("seed {seed}: {err}"))?;
        if !out.outcome.iter().all(|c| done.outcome.contains(*c)) {
            return Err(format!("{}: completion dropped candidates", describe(&e, seed)));
        }
        let full = verify_price_system(&e, &done.outcome, &done.ledger.to_price_system(Rational::one()))
            .map_err(|err| err.to_string())?;
        if full.is_satisfied() {
            Ok(())
        } else {
            Err(format!("{}: completion fails C1-C5: {full:?}", describe(&e, seed)))
        }
    })
}

fn subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << m).map(move |mask| (0..m).filter(|&c| mask >> c & 1 == 1).collect())
}

/// `sum_i H(|A_i ∩ W|)` computed directly.
fn pav_score(e: &Election, w: &[CandidateId]) -> Rational {
    let mut score = Rational::zero();
    for i in 0..e.n() {
        let hits = w.iter().filter(|&&c| e.utility(i, c).is_positive()).count();
        for j in 1..=hits {
            score += Rational::new(1, j as i64);
        }
    }
    score
}

/// PAV against scoring every feasible subset, `m <= 12`.
pub fn pav_matches_enumeration(count: u64) -> Check {
    all_seeds(count, |seed| {
        let mut r = rng(seed);
        let n = r.random_range(1..=8);
        let m = r.random_range(1..=12);
        let density = r.random_range(0.2..0.7);
        let e = if seed.is_multiple_of(2) {
            approval_election(&mut r, n, m, density)
        } else {
            let k = r.random_range(1..=m);
            unit_cost_election(&mut r, n, m, k, density)
        };
        let mut best: Option<Rational> = None;
        let mut winners: Vec<Outcome> = Vec::new();
        for w in subsets(m) {
            if e.cost_of(w.iter()) > Rational::one() {
                continue;
            }
            let s = pav_score(&e, &w);
            let outcome = e.outcome(w).unwrap();
            match best.as_ref().map(|b| s.cmp(b)) {
                Some(std::cmp::Ordering::Less) => {}
                Some(std::cmp::Ordering::Equal) => winners.push(outcome),
                _ => {
                    best = Some(s);
                    winners = vec![outcome];
                }
            }
        }
        winners.sort();
        let got = run_pav(&e).map_err(|err| err.to_string())?;
        if got == winners {
            Ok(())
        } else {
            Err(format!("{}: PAV {got:?}, enumeration {winners:?}", describe(&e, seed)))
        }
    })
}

/// `best_beta_for_bundle` against the maximum over every group `S` of active
/// voters with `|S| >= cost(T) n` of `min_{i in S} u_i(T)`.
pub fn best_beta_matches_enumeration(count: u64) -> Check {
    all_seeds(count, |seed| {
        let e = election(seed);
        let mut r = rng(seed ^ 0xbe7a);
        let active: Vec<VoterId> = (0..e.n()).filter(|_| r.random_bool(0.8)).collect();
        let t: Vec<CandidateId> = (0..e.m()).filter(|_| r.random_bool(0.4)).collect();
        let need = e.cost_of(t.iter()) * Rational::from(e.n());
        let mut oracle: Option<Rational> = None;
        for pick in subsets(active.len()) {
            let s: Vec<VoterId> = pick.iter().map(|&p| active[p]).collect();
            if s.is_empty() || Rational::from(s.len()) < need {
                continue;
            }
            let beta = s.iter().map(|&i| e.voter_utility(i, t.iter())).min().unwrap();
            if oracle.as_ref().is_none_or(|b| beta > *b) {
                oracle = Some(beta);
            }
        }
        let oracle = oracle.filter(|b| b.is_positive() && !t.is_empty());
        let got = best_beta_for_bundle(&t, &active, &e);
        let ok = match (&got, &oracle) {
            (None, None) => true,
            (Some((beta, group)), Some(expected)) => {
                beta == expected
                    && Rational::from(group.len()) >= need
                    && group.iter().all(|i| active.contains(i) && e.voter_utility(*i, t.iter()) >= *beta)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{}: T {t:?}, active {active:?}: got {got:?}, expected {oracle:?}", describe(&e, seed)))
        }
    })
}

/// `sum_i min(remaining_i, u_i(c) rho)`, written out directly.
fn spend(e: &Election, ledger: &PaymentLedger, c: CandidateId, rho: &Rational) -> Rational {
    (0..e.n()).fold(Rational::zero(), |acc, i| {
        let want = e.utility(i, c) * rho;
        acc + want.min_of(ledger.remaining(i).clone())
    })
}

/// A ledger in which random voters have already spent part of their share.
fn random_ledger(e: &Election, seed: u64) -> PaymentLedger {
    let mut r = rng(seed ^ 0x1ed9e7);
    let mut ledger = PaymentLedger::new(e.n());
    for i in 0..e.n() {
        if r.random_bool(0.5) {
            let spent = ledger.remaining(i) * Rational::new(r.random_range(0..=4i64), 4);
            if spent.is_positive() {
                ledger.charge(i, 0, spent);
            }
        }
    }
    ledger
}

/// `min_rho` is exact at the returned value, bisection brackets the same
/// crossing, and no sample below it already covers the cost.
pub fn min_rho_matches_bisection(count: u64) -> Check {
    const SAMPLES: i64 = 1000;
    all_seeds(count, |seed| {
        let e = election(seed);
        let ledger = random_ledger(&e, seed);
        for c in 0..e.m() {
            let cost = e.cost(c);
            let fail = |what: String| Err(format!("{}: {} {what}", describe(&e, seed), e.name(c)));
            // Past the largest breakpoint every supporter pays everything.
            let ceiling = (0..e.n())
                .filter(|&i| e.utility(i, c).is_positive())
                .map(|i| ledger.remaining(i) / e.utility(i, c))
                .max()
                .unwrap_or_default();
            let cap = spend(&e, &ledger, c, &ceiling);
            match min_rho(c, &ledger, &e) {
                None if cap < *cost => {}
                None => return fail(format!("reported unaffordable but supporters hold {cap}")),
                Some(rho) => {
                    if &spend(&e, &ledger, c, &rho) != cost {
                        return fail(format!("f({rho}) != cost"));
                    }
                    let (mut lo, mut hi) = (Rational::zero(), ceiling.clone());
                    for _ in 0..40 {
                        let mid = (&lo + &hi) / Rational::from(2usize);
                        if &spend(&e, &ledger, c, &mid) >= cost {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    if rho < lo || rho > hi {
                        return fail(format!("rho {rho} outside bisection bracket [{lo}, {hi}]"));
                    }
                    for j in 0..SAMPLES {
                        let x = &rho * Rational::new(j, SAMPLES);
                        if &spend(&e, &ledger, c, &x) >= cost && cost.is_positive() {
                            return fail(format!("already affordable at {x} < {rho}"));
                        }
                    }
                }
            }
        }
        Ok(())
    })
}
