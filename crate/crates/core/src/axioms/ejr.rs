//! Extended justified representation.
//!
//! For a group `S` and bundle `T` with `|S| >= cost(T) * n`, the best
//! thresholds are `alpha(c) = min_{i in S} u_i(c)`, and `S` is owed
//! `theta = sum_{c in T} alpha(c)`. The outcome violates EJR when every member
//! gets less than `theta` and, in the "up to one" form, no single extra
//! candidate `a` lifts any member strictly above `theta`.
//!
//! The search fixes `T`, keeps only voters who like every candidate of `T`
//! (a zero `alpha(c)` can be dropped from `T` without weakening the claim) and
//! enumerates groups of exactly `ceil(cost(T) * n)` voters: shrinking a
//! violating group only raises the thresholds.

use std::collections::BTreeMap;

use super::{
    for_each_bundle, is_large_enough, outcome_utilities, required_group_size, too_many_candidates,
    Axiom, AxiomVerdict, SearchBounds, Step, Witness,
};
use crate::error::{Error, Result};
use crate::model::{CandidateId, Election, Outcome, VoterId};
use crate::rational::Rational;

/// Approval-ballot EJR: no bundle `T` whose common supporters number at least
/// `cost(T) * n` may leave all of them with fewer than `|T|` approved winners.
pub fn check_ejr_approval(e: &Election, w: &Outcome, bounds: SearchBounds) -> Result<AxiomVerdict> {
    if !e.is_approval() {
        return Err(Error::Domain("approval EJR needs 0/1 utilities".into()));
    }
    if let Some(v) = too_many_candidates(Axiom::EjrApproval, e, bounds) {
        return Ok(v);
    }
    let satisfaction: Vec<usize> = (0..e.n())
        .map(|i| e.approval_set(i).iter().filter(|c| w.contains(**c)).count())
        .collect();
    let mut found = None;
    for_each_bundle(e, |t, cost| {
        let common = common_supporters(e, t);
        if !is_large_enough(e, common.len(), cost) {
            return Step::SkipSupersets;
        }
        if common.iter().all(|&i| satisfaction[i] < t.len()) {
            found = Some(Witness {
                voters: common,
                candidates: t.to_vec(),
                ..Witness::default()
            });
            return Step::Stop;
        }
        Step::Descend
    });
    Ok(match found {
        Some(witness) => AxiomVerdict::violated(Axiom::EjrApproval, witness),
        None => AxiomVerdict::satisfied(Axiom::EjrApproval),
    }
    .with_bounds(bounds))
}

/// Direct evaluation of an approval EJR witness.
pub fn is_ejr_approval_violation(e: &Election, w: &Outcome, s: &[VoterId], t: &[CandidateId]) -> bool {
    !t.is_empty()
        && is_large_enough(e, s.len(), &e.cost_of(t))
        && s.iter().all(|&i| {
            t.iter().all(|&c| e.utility(i, c).is_positive())
                && e.approval_set(i).iter().filter(|c| w.contains(**c)).count() < t.len()
        })
}

/// EJR up to one candidate for general additive utilities.
pub fn check_ejr(e: &Election, w: &Outcome, bounds: SearchBounds) -> Result<AxiomVerdict> {
    Ok(search(e, w, bounds, true))
}

/// EJR without the "up to one candidate" relaxation.
pub fn check_ejr_strict(e: &Election, w: &Outcome, bounds: SearchBounds) -> Result<AxiomVerdict> {
    Ok(search(e, w, bounds, false))
}

/// Direct evaluation of an EJR witness with thresholds `alpha(c) = min_S u_i(c)`.
pub fn is_ejr_violation(
    e: &Election,
    w: &Outcome,
    s: &[VoterId],
    t: &[CandidateId],
    up_to_one: bool,
) -> bool {
    if s.is_empty() || t.is_empty() || !is_large_enough(e, s.len(), &e.cost_of(t)) {
        return false;
    }
    let theta: Rational = t
        .iter()
        .map(|&c| s.iter().map(|&i| e.utility(i, c)).min().expect("non-empty group").clone())
        .sum();
    s.iter().all(|&i| {
        let have = e.voter_utility(i, w.iter());
        have < theta
            && (!up_to_one
                || (0..e.m())
                    .filter(|a| !w.contains(*a))
                    .all(|a| &have + e.utility(i, a) <= theta))
    })
}

fn common_supporters(e: &Election, t: &[CandidateId]) -> Vec<VoterId> {
    let mut common: Vec<VoterId> = e.supporters(t[0]).to_vec();
    for &c in &t[1..] {
        common.retain(|&i| e.utility(i, c).is_positive());
    }
    common
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    acc
}

fn search(e: &Election, w: &Outcome, bounds: SearchBounds, up_to_one: bool) -> AxiomVerdict {
    let axiom = if up_to_one { Axiom::Ejr } else { Axiom::EjrStrict };
    if let Some(v) = too_many_candidates(axiom, e, bounds) {
        return v;
    }
    let have = outcome_utilities(e, w);
    // Best single outside candidate per voter; adding a member of W changes nothing.
    let best_extra: Vec<Rational> = (0..e.n())
        .map(|i| {
            (0..e.m())
                .filter(|a| !w.contains(*a))
                .map(|a| e.utility(i, a).clone())
                .max()
                .unwrap_or_default()
        })
        .collect();
    let ctx = Context {
        e,
        have: &have,
        best_extra: &best_extra,
        up_to_one,
    };

    let mut found = None;
    let mut skipped = 0usize;
    for_each_bundle(e, |t, cost| {
        let r = required_group_size(e, cost);
        let common = common_supporters(e, t);
        if common.len() < r {
            return Step::SkipSupersets;
        }
        let pool: Vec<VoterId> = common
            .into_iter()
            .filter(|&i| {
                let bundle = e.voter_utility(i, t.iter());
                have[i] < bundle && (!up_to_one || &have[i] + &best_extra[i] <= bundle)
            })
            .collect();
        if pool.len() < r {
            return Step::Descend;
        }
        // Identical utilities on T make every r-subset equivalent.
        if pool[1..].iter().all(|&i| t.iter().all(|&c| e.utility(i, c) == e.utility(pool[0], c))) {
            found = Some(Witness {
                voters: pool[..r].to_vec(),
                candidates: t.to_vec(),
                alpha: Some(t.iter().map(|&c| (c, e.utility(pool[0], c).clone())).collect()),
                ..Witness::default()
            });
            return Step::Stop;
        }
        if binomial(pool.len(), r) > bounds.max_groups() {
            skipped += 1;
            return Step::Descend;
        }
        let mut group = Vec::with_capacity(r);
        if let Some(s) = ctx.choose(t, &pool, 0, r, &mut group, None) {
            let alpha: BTreeMap<CandidateId, Rational> = t
                .iter()
                .map(|&c| (c, s.iter().map(|&i| e.utility(i, c)).min().unwrap().clone()))
                .collect();
            found = Some(Witness {
                voters: s,
                candidates: t.to_vec(),
                alpha: Some(alpha),
                ..Witness::default()
            });
            return Step::Stop;
        }
        Step::Descend
    });

    let verdict = match found {
        Some(witness) => AxiomVerdict::violated(axiom, witness),
        None if skipped > 0 => AxiomVerdict::inconclusive(
            axiom,
            format!("{skipped} bundles had more candidate groups than 2^{}", bounds.max_voters),
        ),
        None => AxiomVerdict::satisfied(axiom),
    };
    verdict.with_bounds(bounds)
}

struct Context<'a> {
    e: &'a Election,
    have: &'a [Rational],
    best_extra: &'a [Rational],
    up_to_one: bool,
}

impl Context<'_> {
    fn deprived(&self, i: VoterId, theta: &Rational) -> bool {
        self.have[i] < *theta && (!self.up_to_one || &self.have[i] + &self.best_extra[i] <= *theta)
    }

    /// Picks `need` more voters from `pool[from..]`. `alpha` holds the current
    /// per-candidate minima (None while the group is empty). Adding voters
    /// only lowers theta, so a group that already fails is abandoned.
    fn choose(
        &self,
        t: &[CandidateId],
        pool: &[VoterId],
        from: usize,
        need: usize,
        group: &mut Vec<VoterId>,
        alpha: Option<&[Rational]>,
    ) -> Option<Vec<VoterId>> {
        if need == 0 {
            return Some(group.clone());
        }
        for idx in from..=pool.len() - need {
            let j = pool[idx];
            let next: Vec<Rational> = match alpha {
                None => t.iter().map(|&c| self.e.utility(j, c).clone()).collect(),
                Some(prev) => prev
                    .iter()
                    .zip(t)
                    .map(|(a, &c)| a.clone().min_of(self.e.utility(j, c).clone()))
                    .collect(),
            };
            let theta: Rational = next.iter().sum();
            if !self.deprived(j, &theta) || !group.iter().all(|&i| self.deprived(i, &theta)) {
                continue;
            }
            group.push(j);
            let found = self.choose(t, pool, idx + 1, need - 1, group, Some(&next));
            group.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
}
