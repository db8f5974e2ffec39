//! The Greedy Cohesive Rule.
//!
//! Each round looks for the bundle `T` of remaining candidates and group `S`
//! of remaining voters with `|S| >= cost(T) * n` that maximise
//! `beta = min_{i in S} u_i(T)`, preferring cheaper bundles on ties and then
//! the lexicographically smallest one. `T` is elected and `S` removed. The
//! rule stops when no positive `beta` is left.
//!
//! For a fixed bundle the best group is forced: the `r = ceil(cost(T) * n)`
//! voters with the largest `u_i(T)`, so `beta` is the `r`-th order statistic.
//! The bundle search is a depth-first walk over subsets in lexicographic
//! order with a branch-and-bound cut.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use num_traits::ToPrimitive;

use crate::axioms::verify_price_system_partial;
use crate::equal_shares::{resume_rule_x, PaymentLedger, RuleXOutput, TieBreak};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::model::{CandidateId, Election, Outcome, VoterId};
use crate::rational::{lcm_of_denominators, Rational};

/// One round: `group` is weakly `(beta, bundle)`-cohesive and is removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohesiveRound {
    pub beta: Rational,
    pub group: Vec<VoterId>,
    pub bundle: Vec<CandidateId>,
    pub removed_voters: Vec<VoterId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcrOutput {
    pub outcome: Outcome,
    pub rounds: Vec<CohesiveRound>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GcrBounds {
    /// Largest number of remaining candidates whose subsets are searched.
    pub max_candidates: usize,
}

impl Default for GcrBounds {
    fn default() -> Self {
        GcrBounds { max_candidates: 20 }
    }
}

/// Node budget for the payment construction graph.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

fn group_size(e: &Election, cost: &Rational) -> usize {
    (cost * Rational::from(e.n())).ceil_count()
}

/// Best `beta` for bundle `t` among `active` voters, with the group attaining
/// it: the `ceil(cost(T) * n)` voters with the largest `u_i(T)`, ties going to
/// lower indices.
pub fn best_beta_for_bundle(
    t: &[CandidateId],
    active: &[VoterId],
    e: &Election,
) -> Option<(Rational, Vec<VoterId>)> {
    let r = group_size(e, &e.cost_of(t));
    if t.is_empty() || r > active.len() {
        return None;
    }
    let mut scored: Vec<(Rational, VoterId)> = active
        .iter()
        .map(|&i| (e.voter_utility(i, t.iter()), i))
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(r);
    let beta = scored.last()?.0.clone();
    if !beta.is_positive() {
        return None;
    }
    let mut group: Vec<VoterId> = scored.into_iter().map(|s| s.1).collect();
    group.sort_unstable();
    Some((beta, group))
}

/// Active voters grouped by identical utility rows.
struct VoterTypes {
    reps: Vec<VoterId>,
    counts: Vec<usize>,
    total: usize,
}

impl VoterTypes {
    fn new(e: &Election, active: &[VoterId]) -> Self {
        let mut index: HashMap<&[Rational], usize> = HashMap::new();
        let mut reps = Vec::new();
        let mut counts = Vec::new();
        for &i in active {
            let slot = *index.entry(e.utility_row(i)).or_insert_with(|| {
                reps.push(i);
                counts.push(0);
                reps.len() - 1
            });
            counts[slot] += 1;
        }
        VoterTypes {
            reps,
            counts,
            total: active.len(),
        }
    }

    /// `r`-th largest value of `sums` weighted by type counts.
    fn order_statistic(&self, sums: &[Rational], r: usize) -> Rational {
        let mut order: Vec<usize> = (0..sums.len()).collect();
        order.sort_by(|&a, &b| sums[b].cmp(&sums[a]));
        let mut seen = 0;
        for t in order {
            seen += self.counts[t];
            if seen >= r {
                return sums[t].clone();
            }
        }
        Rational::zero()
    }
}

/// Best `(beta, cost)` found so far and the bundles attaining it.
struct Best {
    beta: Rational,
    cost: Rational,
    bundles: Vec<Vec<CandidateId>>,
}

struct BundleSearch<'a> {
    e: &'a Election,
    types: VoterTypes,
    candidates: Vec<CandidateId>,
    /// Largest single utility for `candidates[k]` among active voters.
    max_gain: Vec<Rational>,
    active_share: Rational,
    keep_ties: bool,
    best: Option<Best>,
}

impl<'a> BundleSearch<'a> {
    fn new(e: &'a Election, active: &[VoterId], remaining: &[CandidateId], keep_ties: bool) -> Self {
        let types = VoterTypes::new(e, active);
        let max_gain = remaining
            .iter()
            .map(|&c| {
                types
                    .reps
                    .iter()
                    .map(|&i| e.utility(i, c).clone())
                    .max()
                    .unwrap_or_default()
            })
            .collect();
        BundleSearch {
            e,
            active_share: Rational::new(types.total as i64, e.n() as i64),
            types,
            candidates: remaining.to_vec(),
            max_gain,
            keep_ties,
            best: None,
        }
    }

    fn run(mut self) -> Option<Best> {
        let sums = vec![Rational::zero(); self.types.reps.len()];
        self.descend(0, &mut Vec::new(), &Rational::zero(), &sums);
        self.best
    }

    fn descend(&mut self, from: usize, bundle: &mut Vec<CandidateId>, cost: &Rational, sums: &[Rational]) {
        for k in from..self.candidates.len() {
            let c = self.candidates[k];
            let next_cost = cost + self.e.cost(c);
            // Groups can only come from active voters.
            if next_cost > self.active_share {
                continue;
            }
            let r = group_size(self.e, &next_cost);
            let next_sums: Vec<Rational> = sums
                .iter()
                .zip(&self.types.reps)
                .map(|(s, &i)| s + self.e.utility(i, c))
                .collect();
            let beta = self.types.order_statistic(&next_sums, r);
            bundle.push(c);
            if beta.is_positive() {
                self.offer(&beta, &next_cost, bundle);
            }
            if self.worth_extending(k, &beta, &next_cost) {
                self.descend(k + 1, bundle, &next_cost, &next_sums);
            }
            bundle.pop();
        }
    }

    fn offer(&mut self, beta: &Rational, cost: &Rational, bundle: &[CandidateId]) {
        match &mut self.best {
            Some(best) if *beta < best.beta || (*beta == best.beta && *cost > best.cost) => {}
            Some(best) if *beta == best.beta && *cost == best.cost => {
                if self.keep_ties {
                    best.bundles.push(bundle.to_vec());
                }
            }
            _ => {
                self.best = Some(Best {
                    beta: beta.clone(),
                    cost: cost.clone(),
                    bundles: vec![bundle.to_vec()],
                })
            }
        }
    }

    /// A superset `T ∪ X` has `beta <= beta(T) + sum_{c in X} max_gain(c)`:
    /// the group only grows and each member gains at most `max_gain(c)` per
    /// added candidate.
    fn worth_extending(&self, k: usize, beta: &Rational, cost: &Rational) -> bool {
        let room = &self.active_share - cost;
        let mut bound = beta.clone();
        let mut cheapest: Option<&Rational> = None;
        for j in k + 1..self.candidates.len() {
            let cj = self.e.cost(self.candidates[j]);
            if *cj <= room {
                bound += &self.max_gain[j];
                cheapest = Some(cheapest.map_or(cj, |m| m.min(cj)));
            }
        }
        let Some(cheapest) = cheapest else {
            return false;
        };
        match &self.best {
            None => bound.is_positive(),
            Some(best) => {
                if bound != best.beta {
                    return bound > best.beta;
                }
                let min_cost = cost + cheapest;
                if self.keep_ties {
                    min_cost <= best.cost
                } else {
                    min_cost < best.cost
                }
            }
        }
    }
}

struct State {
    active: Vec<VoterId>,
    remaining: Vec<CandidateId>,
    elected: Vec<CandidateId>,
    rounds: Vec<CohesiveRound>,
}

impl State {
    fn new(e: &Election) -> Self {
        State {
            active: (0..e.n()).collect(),
            remaining: (0..e.m()).collect(),
            elected: Vec::new(),
            rounds: Vec::new(),
        }
    }

    fn commit(&mut self, beta: Rational, bundle: Vec<CandidateId>, group: Vec<VoterId>) {
        self.active.retain(|i| group.binary_search(i).is_err());
        self.remaining.retain(|c| !bundle.contains(c));
        self.elected.extend(&bundle);
        self.rounds.push(CohesiveRound {
            beta,
            removed_voters: group.clone(),
            group,
            bundle,
        });
    }

    fn finish(self, e: &Election) -> Result<GcrOutput> {
        let outcome = Outcome::new(e, self.elected)
            .map_err(|err| Error::Internal(format!("greedy cohesive outcome is infeasible: {err}")))?;
        Ok(GcrOutput {
            outcome,
            rounds: self.rounds,
        })
    }
}

fn check_size(e: &Election, bounds: GcrBounds) -> Result<()> {
    if e.m() > bounds.max_candidates {
        return Err(Error::Refused {
            what: "candidates for the cohesive bundle search".into(),
            actual: e.m(),
            bound: bounds.max_candidates,
        });
    }
    Ok(())
}

/// Runs the Greedy Cohesive Rule with deterministic tie-breaking.
pub fn run_gcr(e: &Election, bounds: GcrBounds) -> Result<GcrOutput> {
    check_size(e, bounds)?;
    let mut state = State::new(e);
    while let Some(best) = BundleSearch::new(e, &state.active, &state.remaining, false).run() {
        let bundle = best.bundles.into_iter().next().expect("best has a bundle");
        let (beta, group) = best_beta_for_bundle(&bundle, &state.active, e)
            .ok_or_else(|| Error::Internal("bundle search and group selection disagree".into()))?;
        debug_assert_eq!(beta, best.beta);
        state.commit(beta, bundle, group);
    }
    state.finish(e)
}

/// Every outcome the rule can produce under some choice of bundle (among the
/// maximal-`beta`, minimal-cost ones) and group (any `ceil(cost(T) * n)`
/// voters reaching `beta`) in every round. Intended for tiny instances.
pub fn run_gcr_alternatives(e: &Election, bounds: GcrBounds, max_branches: usize) -> Result<Vec<GcrOutput>> {
    check_size(e, bounds)?;
    let mut found: BTreeMap<Outcome, GcrOutput> = BTreeMap::new();
    let mut explored = 0usize;
    let mut stack = vec![State::new(e)];
    while let Some(state) = stack.pop() {
        match BundleSearch::new(e, &state.active, &state.remaining, true).run() {
            None => {
                explored += 1;
                if explored > max_branches {
                    return Err(Error::Refused {
                        what: "cohesive-rule branches".into(),
                        actual: explored,
                        bound: max_branches,
                    });
                }
                let out = state.finish(e)?;
                found.entry(out.outcome.clone()).or_insert(out);
            }
            Some(best) => {
                for bundle in best.bundles.iter().rev() {
                    let r = group_size(e, &e.cost_of(bundle));
                    let qualified: Vec<VoterId> = state
                        .active
                        .iter()
                        .copied()
                        .filter(|&i| e.voter_utility(i, bundle.iter()) >= best.beta)
                        .collect();
                    for group in qualified.into_iter().combinations(r) {
                        stack.push(State {
                            active: state.active.clone(),
                            remaining: state.remaining.clone(),
                            elected: state.elected.clone(),
                            rounds: state.rounds.clone(),
                        });
                        let next = stack.last_mut().expect("just pushed");
                        next.commit(best.beta.clone(), bundle.clone(), group);
                    }
                }
            }
        }
    }
    Ok(found.into_values().collect())
}

/// Payments satisfying C1–C4 with `b = 1` for a cohesive-rule outcome.
pub fn gcr_payment_construction(e: &Election, rounds: &[CohesiveRound]) -> Result<PaymentLedger> {
    gcr_payment_construction_with(e, rounds, DEFAULT_NODE_BUDGET)
}

/// Each round's group pays for its bundle. With `d` the lcm of the bundle's
/// cost denominators, a candidate splits into `cost(c) * d` parts that each
/// need `n` coins, and every group member holds `d` coins of value
/// `1 / (d n)`. A coin may go to a part of `c` only if its owner likes `c`.
/// Parts of one candidate are interchangeable, as are coins of one voter, so
/// the assignment is a flow `source -> c -> i -> sink` with capacities
/// `cost(c) d n`, `d` and `d`. Hall's condition for b-matchings guarantees
/// a saturating flow; `p_i(c) = flow(c, i) / (d n)`.
///
/// `node_budget` caps the size of the uncontracted part/coin graph.
pub fn gcr_payment_construction_with(
    e: &Election,
    rounds: &[CohesiveRound],
    node_budget: u64,
) -> Result<PaymentLedger> {
    let mut ledger = PaymentLedger::new(e.n());
    let n = e.n() as u64;
    for round in rounds {
        let t = &round.bundle;
        let s = &round.group;
        let d_big = lcm_of_denominators(t.iter().map(|&c| e.cost(c)));
        let parts: Rational = t
            .iter()
            .map(|&c| e.cost(c) * Rational::from_integer(d_big.clone()))
            .sum();
        let nodes = parts + Rational::from_integer(d_big.clone() * s.len());
        let node_count = nodes.floor().to_u64().unwrap_or(u64::MAX);
        if node_count > node_budget {
            return Err(Error::Refused {
                what: format!("payment graph nodes (d = {d_big})"),
                actual: node_count.min(usize::MAX as u64) as usize,
                bound: node_budget.min(usize::MAX as u64) as usize,
            });
        }
        let d = d_big.to_u64().expect("d fits after the node budget check");

        let source = 0;
        let sink = 1 + t.len() + s.len();
        let mut g = FlowNetwork::new(sink + 1);
        let mut required = 0u64;
        for (k, &c) in t.iter().enumerate() {
            let coins = (e.cost(c) * Rational::from_integer(d_big.clone()))
                .numer()
                .to_u64()
                .expect("part count fits")
                * n;
            required += coins;
            g.add_edge(source, 1 + k, coins);
        }
        let mut links = Vec::new();
        for (k, &c) in t.iter().enumerate() {
            for (j, &i) in s.iter().enumerate() {
                if e.utility(i, c).is_positive() {
                    links.push((g.add_edge(1 + k, 1 + t.len() + j, d), i, c));
                }
            }
        }
        for j in 0..s.len() {
            g.add_edge(1 + t.len() + j, sink, d);
        }
        let routed = g.max_flow(source, sink);
        if routed != required {
            return Err(Error::Internal(format!(
                "payment flow for bundle {} routes {routed} of {required} coins",
                e.format_set(t.iter())
            )));
        }
        let coin = Rational::new(1, (d * n) as i64);
        for (edge, i, c) in links {
            let f = g.flow(edge);
            if f > 0 {
                ledger.charge(i, c, Rational::from(f as usize) * &coin);
            }
        }
    }
    Ok(ledger)
}

/// Resumes Rule X from a cohesive-rule outcome, with every voter's budget
/// reduced by what the ledger says they already paid. The result is
/// supported by a price system with `b = 1`.
pub fn gcr_priceable_completion(
    e: &Election,
    outcome: &Outcome,
    ledger: PaymentLedger,
    tie: TieBreak,
) -> Result<RuleXOutput> {
    if ledger.n() != e.n() {
        return Err(Error::Parameter(format!(
            "ledger covers {} voters, election has {}",
            ledger.n(),
            e.n()
        )));
    }
    let check = verify_price_system_partial(e, outcome, &ledger.to_price_system(Rational::one()))?;
    if !check.is_satisfied() {
        return Err(Error::Parameter(format!(
            "ledger does not support the outcome: {}",
            check.detail.unwrap_or_default()
        )));
    }
    Ok(resume_rule_x(e, outcome, ledger, tie))
}
