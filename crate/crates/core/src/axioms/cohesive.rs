//! FJR, the core and the alpha-core.
//!
//! For all three axioms the blocking group for a fixed bundle `T` is forced:
//! it is every voter who would be better off with `T` (for FJR, at a given
//! threshold `beta`). A bundle blocks when that group has at least
//! `ceil(cost(T) * n)` members.

use super::{
    for_each_bundle, is_large_enough, outcome_utilities, too_many_candidates, Axiom, AxiomVerdict,
    SearchBounds, Step, Witness,
};
use crate::error::{Error, Result};
use crate::model::{CandidateId, Election, Outcome, VoterId};
use crate::rational::Rational;

/// Searches bundles in lexicographic order; `blocking` returns the forced
/// group (and parameter) for a bundle if it blocks.
fn first_blocking<F>(e: &Election, axiom: Axiom, bounds: SearchBounds, mut blocking: F) -> AxiomVerdict
where
    F: FnMut(&[CandidateId], &Rational) -> Option<Witness>,
{
    if let Some(v) = too_many_candidates(axiom, e, bounds) {
        return v;
    }
    let mut found = None;
    for_each_bundle(e, |t, cost| match blocking(t, cost) {
        Some(w) => {
            found = Some(w);
            Step::Stop
        }
        None => Step::Descend,
    });
    match found {
        Some(w) => AxiomVerdict::violated(axiom, w),
        None => AxiomVerdict::satisfied(axiom),
    }
    .with_bounds(bounds)
}

fn bundle_utilities(e: &Election, t: &[CandidateId]) -> Vec<Rational> {
    (0..e.n()).map(|i| e.voter_utility(i, t.iter())).collect()
}

/// Full justified representation. For each bundle, every distinct positive
/// value of `u_j(T)` is tried as `beta`; the largest violating `beta` is
/// reported.
pub fn check_fjr(e: &Election, w: &Outcome, bounds: SearchBounds) -> Result<AxiomVerdict> {
    let have = outcome_utilities(e, w);
    Ok(first_blocking(e, Axiom::Fjr, bounds, |t, cost| {
        let bundle = bundle_utilities(e, t);
        let mut betas: Vec<&Rational> = (0..e.n())
            .filter(|&i| bundle[i] > have[i])
            .map(|i| &bundle[i])
            .collect();
        betas.sort_unstable_by(|a, b| b.cmp(a));
        betas.dedup();
        betas.into_iter().find_map(|beta| {
            let group: Vec<VoterId> = (0..e.n())
                .filter(|&i| bundle[i] >= *beta && *beta > have[i])
                .collect();
            is_large_enough(e, group.len(), cost).then(|| Witness {
                voters: group,
                candidates: t.to_vec(),
                beta: Some(beta.clone()),
                ..Witness::default()
            })
        })
    }))
}

/// Direct evaluation of an FJR witness.
pub fn is_fjr_violation(
    e: &Election,
    w: &Outcome,
    s: &[VoterId],
    t: &[CandidateId],
    beta: &Rational,
) -> bool {
    !t.is_empty()
        && beta.is_positive()
        && is_large_enough(e, s.len(), &e.cost_of(t))
        && s.iter().all(|&i| {
            e.voter_utility(i, t.iter()) >= *beta && e.voter_utility(i, w.iter()) < *beta
        })
}

/// Core: no group of at least `cost(T) * n` voters strictly prefers `T`.
pub fn check_core(e: &Election, w: &Outcome, bounds: SearchBounds) -> Result<AxiomVerdict> {
    let have = outcome_utilities(e, w);
    Ok(first_blocking(e, Axiom::Core, bounds, |t, cost| {
        let group: Vec<VoterId> = (0..e.n())
            .filter(|&i| e.voter_utility(i, t.iter()) > have[i])
            .collect();
        is_large_enough(e, group.len(), cost).then(|| Witness {
            voters: group,
            candidates: t.to_vec(),
            ..Witness::default()
        })
    }))
}

/// Direct evaluation of a core witness.
pub fn is_core_violation(e: &Election, w: &Outcome, s: &[VoterId], t: &[CandidateId]) -> bool {
    !t.is_empty()
        && is_large_enough(e, s.len(), &e.cost_of(t))
        && s
            .iter()
            .all(|&i| e.voter_utility(i, t.iter()) > e.voter_utility(i, w.iter()))
}

/// The alpha-core: `T` blocks when at least `cost(T) * n` voters satisfy
/// `u_i(W ∪ {c}) < u_i(T) / alpha` for every `c` in `T`.
pub fn check_alpha_core(
    e: &Election,
    w: &Outcome,
    alpha: &Rational,
    bounds: SearchBounds,
) -> Result<AxiomVerdict> {
    if *alpha < Rational::one() {
        return Err(Error::Parameter(format!("alpha must be at least 1, got {alpha}")));
    }
    let have = outcome_utilities(e, w);
    Ok(first_blocking(e, Axiom::AlphaCore, bounds, |t, cost| {
        let group: Vec<VoterId> = (0..e.n())
            .filter(|&i| alpha_deprived(e, w, &have[i], i, t, alpha))
            .collect();
        is_large_enough(e, group.len(), cost).then(|| Witness {
            voters: group,
            candidates: t.to_vec(),
            ..Witness::default()
        })
    }))
}

fn alpha_deprived(
    e: &Election,
    w: &Outcome,
    have: &Rational,
    i: VoterId,
    t: &[CandidateId],
    alpha: &Rational,
) -> bool {
    let extra = t
        .iter()
        .filter(|c| !w.contains(**c))
        .map(|&c| e.utility(i, c))
        .max()
        .cloned()
        .unwrap_or_default();
    (have + extra) * alpha < e.voter_utility(i, t.iter())
}

/// Direct evaluation of an alpha-core witness.
pub fn is_alpha_core_violation(
    e: &Election,
    w: &Outcome,
    s: &[VoterId],
    t: &[CandidateId],
    alpha: &Rational,
) -> bool {
    !t.is_empty()
        && is_large_enough(e, s.len(), &e.cost_of(t))
        && s.iter().all(|&i| {
            let have = e.voter_utility(i, w.iter());
            t.iter().all(|&c| {
                let with_c = if w.contains(c) {
                    have.clone()
                } else {
                    &have + e.utility(i, c)
                };
                with_c * alpha < e.voter_utility(i, t.iter())
            })
        })
}

/// Highest utility voter `i` can get from a feasible outcome (exact 0/1
/// knapsack by branch and bound).
pub fn max_feasible_utility(e: &Election, i: VoterId) -> Rational {
    let mut items: Vec<CandidateId> = e.liked(i).to_vec();
    // Best utility per unit of cost first, so the fractional bound is tight.
    items.sort_by(|&a, &b| {
        (e.utility(i, b) / e.cost(b))
            .cmp(&(e.utility(i, a) / e.cost(a)))
            .then(a.cmp(&b))
    });

    fn bound(e: &Election, i: VoterId, items: &[CandidateId], mut room: Rational) -> Rational {
        let mut total = Rational::zero();
        for &c in items {
            if e.cost(c) <= &room {
                total += e.utility(i, c);
                room -= e.cost(c);
            } else {
                total += e.utility(i, c) * &room / e.cost(c);
                break;
            }
        }
        total
    }

    fn go(
        e: &Election,
        i: VoterId,
        items: &[CandidateId],
        room: Rational,
        value: Rational,
        best: &mut Rational,
    ) {
        if value > *best {
            *best = value.clone();
        }
        let Some((&c, rest)) = items.split_first() else {
            return;
        };
        if &value + bound(e, i, items, room.clone()) <= *best {
            return;
        }
        if e.cost(c) <= &room {
            go(e, i, rest, &room - e.cost(c), &value + e.utility(i, c), best);
        }
        go(e, i, rest, room, value, best);
    }

    let mut best = Rational::zero();
    go(e, i, &items, Rational::one(), Rational::zero(), &mut best);
    best
}

/// A rational upper bound on `4 ln(2 u_max / u_min)`, where `u_max` is the
/// largest utility any voter gets from a feasible outcome and `u_min` the
/// smallest positive one (a single candidate, since every candidate fits).
///
/// The logarithm is taken in `f64` and rounded outward by a relative and an
/// absolute margin far above `f64` error, then converted exactly.
pub fn alpha_core_bound(e: &Election) -> Rational {
    let u_max = (0..e.n())
        .map(|i| max_feasible_utility(e, i))
        .max()
        .unwrap_or_else(Rational::one);
    let u_min = e.min_positive_utility();
    let ratio = (u_max / u_min).to_f64();
    let value = 4.0 * (2.0 * ratio).ln();
    let padded = value * (1.0 + 1e-9) + 1e-9;
    Rational::from_f64_exact(padded).expect("finite alpha bound")
}
