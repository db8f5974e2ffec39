//! Price systems and exhaustiveness.
//!
//! A price system `(b, p)` gives every voter `b/n` and pays for the outcome:
//!
//! - C1: voters pay only for candidates they like;
//! - C2: nobody spends more than `b/n`;
//! - C3: every elected candidate is paid exactly its cost;
//! - C4: nobody pays for an unelected candidate;
//! - C5: the supporters of an unelected candidate hold at most its cost in
//!   unspent money.

use std::collections::BTreeMap;

use super::lp::{solve_feasibility, Relation};
use super::{Axiom, AxiomVerdict, Witness};
use crate::error::{Error, Result};
use crate::model::{CandidateId, Election, Outcome, VoterId};
use crate::rational::Rational;

/// Size cap for [`find_price_system`].
pub const MAX_LP_VARIABLES: usize = 200;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PriceSystem {
    pub b: Rational,
    /// Non-zero payments keyed by `(voter, candidate)`.
    pub payments: BTreeMap<(VoterId, CandidateId), Rational>,
}

impl PriceSystem {
    pub fn payment(&self, voter: VoterId, c: CandidateId) -> Rational {
        self.payments.get(&(voter, c)).cloned().unwrap_or_default()
    }

    fn spent(&self, n: usize) -> Vec<Rational> {
        let mut spent = vec![Rational::zero(); n];
        for (&(i, _), p) in &self.payments {
            spent[i] += p;
        }
        spent
    }

    fn collected(&self, m: usize) -> Vec<Rational> {
        let mut collected = vec![Rational::zero(); m];
        for (&(_, c), p) in &self.payments {
            collected[c] += p;
        }
        collected
    }
}

fn failure(condition: &str, voters: Vec<VoterId>, candidates: Vec<CandidateId>, detail: String) -> AxiomVerdict {
    AxiomVerdict::violated(
        Axiom::PriceSystem,
        Witness {
            voters,
            candidates,
            condition: Some(condition.to_string()),
            ..Witness::default()
        },
    )
    .with_detail(detail)
}

/// Checks C1 through C5 in order and reports the first failure.
pub fn verify_price_system(e: &Election, w: &Outcome, ps: &PriceSystem) -> Result<AxiomVerdict> {
    verify(e, w, ps, true)
}

/// Checks C1 through C4 only.
pub fn verify_price_system_partial(e: &Election, w: &Outcome, ps: &PriceSystem) -> Result<AxiomVerdict> {
    verify(e, w, ps, false)
}

fn verify(e: &Election, w: &Outcome, ps: &PriceSystem, with_c5: bool) -> Result<AxiomVerdict> {
    for &(i, c) in ps.payments.keys() {
        if i >= e.n() {
            return Err(Error::Structural(format!("payment by unknown voter {}", i + 1)));
        }
        if c >= e.m() {
            return Err(Error::Structural(format!("payment for unknown candidate index {c}")));
        }
    }
    if let Some(&c) = w.iter().find(|&&c| c >= e.m()) {
        return Err(Error::Structural(format!("outcome names unknown candidate index {c}")));
    }
    if ps.b < Rational::one() {
        return Err(Error::Parameter(format!("price system budget b must be at least 1, got {}", ps.b)));
    }
    if let Some((&(i, c), p)) = ps.payments.iter().find(|(_, p)| p.is_negative()) {
        return Err(Error::Parameter(format!(
            "voter {} pays a negative amount {p} for {}",
            i + 1,
            e.name(c)
        )));
    }

    for (&(i, c), p) in &ps.payments {
        if p.is_positive() && e.utility(i, c).is_zero() {
            return Ok(failure(
                "C1",
                vec![i],
                vec![c],
                format!("voter {} pays {p} for {} but has no utility for it", i + 1, e.name(c)),
            ));
        }
    }
    let share = &ps.b / Rational::from(e.n());
    let spent = ps.spent(e.n());
    for (i, s) in spent.iter().enumerate() {
        if *s > share {
            return Ok(failure(
                "C2",
                vec![i],
                vec![],
                format!("voter {} spends {s}, more than b/n = {share}", i + 1),
            ));
        }
    }
    let collected = ps.collected(e.m());
    for &c in w.iter() {
        if collected[c] != *e.cost(c) {
            return Ok(failure(
                "C3",
                vec![],
                vec![c],
                format!("{} collects {} but costs {}", e.name(c), collected[c], e.cost(c)),
            ));
        }
    }
    for c in (0..e.m()).filter(|c| !w.contains(*c)) {
        if !collected[c].is_zero() {
            return Ok(failure(
                "C4",
                vec![],
                vec![c],
                format!("unelected {} collects {}", e.name(c), collected[c]),
            ));
        }
    }
    if with_c5 {
        for c in (0..e.m()).filter(|c| !w.contains(*c)) {
            let unspent: Rational = e.supporters(c).iter().map(|&i| &share - &spent[i]).sum();
            if unspent > *e.cost(c) {
                return Ok(failure(
                    "C5",
                    e.supporters(c).to_vec(),
                    vec![c],
                    format!(
                        "supporters of unelected {} hold {unspent}, more than its cost {}",
                        e.name(c),
                        e.cost(c)
                    ),
                ));
            }
        }
    }
    Ok(AxiomVerdict::satisfied(Axiom::PriceSystem))
}

/// Decides whether some price system with `b >= 1` supports `w`, returning one
/// if so.
///
/// Unknowns are `p_i(c)` for elected `c` liked by `i`, plus `b - 1`. C1 and C4
/// hold by construction; C2, C3 and C5 are linear.
pub fn find_price_system(e: &Election, w: &Outcome) -> Result<Option<PriceSystem>> {
    let vars: Vec<(VoterId, CandidateId)> = w
        .iter()
        .flat_map(|&c| e.supporters(c).iter().map(move |&i| (i, c)))
        .collect();
    let num_vars = vars.len() + 1;
    if num_vars > MAX_LP_VARIABLES {
        return Err(Error::Inconclusive(format!(
            "price-system search needs {num_vars} variables, cap is {MAX_LP_VARIABLES}"
        )));
    }
    let extra_b = vars.len();
    let n = Rational::from(e.n());
    let inv_n = n.recip();
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();

    for &c in w.iter() {
        let mut row = vec![Rational::zero(); num_vars];
        for (k, &(_, vc)) in vars.iter().enumerate() {
            if vc == c {
                row[k] = Rational::one();
            }
        }
        rows.push((row, Relation::Eq, e.cost(c).clone()));
    }
    for i in 0..e.n() {
        let mut row = vec![Rational::zero(); num_vars];
        for (k, &(vi, _)) in vars.iter().enumerate() {
            if vi == i {
                row[k] = Rational::one();
            }
        }
        row[extra_b] = -inv_n.clone();
        rows.push((row, Relation::Le, inv_n.clone()));
    }
    for c in (0..e.m()).filter(|c| !w.contains(*c)) {
        let supporters = e.supporters(c);
        let mut row = vec![Rational::zero(); num_vars];
        for (k, &(vi, _)) in vars.iter().enumerate() {
            if supporters.binary_search(&vi).is_ok() {
                row[k] = -Rational::one();
            }
        }
        let size = Rational::from(supporters.len());
        row[extra_b] = &size / &n;
        rows.push((row, Relation::Le, e.cost(c) - &size / &n));
    }

    Ok(solve_feasibility(&rows, num_vars).map(|x| PriceSystem {
        b: Rational::one() + &x[extra_b],
        payments: vars
            .iter()
            .zip(&x)
            .filter(|(_, p)| p.is_positive())
            .map(|(&key, p)| (key, p.clone()))
            .collect(),
    }))
}

/// Exhaustive: no unelected candidate still fits in the budget. The witness
/// is the lowest-index candidate that fits.
pub fn check_exhaustive(e: &Election, w: &Outcome) -> AxiomVerdict {
    let room = Rational::one() - w.total_cost(e);
    match (0..e.m()).find(|&c| !w.contains(c) && e.cost(c) <= &room) {
        Some(c) => AxiomVerdict::violated(
            Axiom::Exhaustive,
            Witness {
                candidates: vec![c],
                ..Witness::default()
            },
        ),
        None => AxiomVerdict::satisfied(Axiom::Exhaustive),
    }
}
