//! Rule X (the Method of Equal Shares) for arbitrary costs and additive
//! utilities.
//!
//! Every voter starts with `1/n`. A candidate `c` is `rho`-affordable when
//! `sum_i min(remaining_i, u_i(c) * rho) = cost(c)`. Each round the candidate
//! affordable for the smallest `rho` is bought and voter `i` pays
//! `min(remaining_i, u_i(c) * rho)`. The run ends when no candidate is
//! affordable for any `rho`.
//!
//! The exhaustive variant raises every zero utility to a small `eps` (so every
//! voter supports every candidate) and takes the limit outcome as `eps -> 0`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateId, Election, Outcome, VoterId};
use crate::rational::Rational;

/// How to choose among candidates that reach the minimal price simultaneously.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    LowestIndex,
    MinCostThenIndex,
}

impl TieBreak {
    pub(crate) fn pick(self, e: &Election, tied: &[CandidateId]) -> CandidateId {
        match self {
            TieBreak::LowestIndex => *tied.iter().min().expect("non-empty tie set"),
            TieBreak::MinCostThenIndex => *tied
                .iter()
                .min_by(|&&a, &&b| e.cost(a).cmp(e.cost(b)).then(a.cmp(&b)))
                .expect("non-empty tie set"),
        }
    }
}

/// Per-voter payments plus remaining budgets.
///
/// `remaining[i] = endowment - sum_c payments[i][c]` and never goes negative.
/// When the ledger comes from a rule run with budget 1, `(1, payments)` is a
/// price system for the outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaymentLedger {
    endowment: Rational,
    payments: Vec<BTreeMap<CandidateId, Rational>>,
    remaining: Vec<Rational>,
    zero_utility: BTreeSet<(VoterId, CandidateId)>,
}

impl PaymentLedger {
    /// Fresh ledger: every voter holds `1/n`.
    pub fn new(n: usize) -> Self {
        let endowment = if n == 0 {
            Rational::zero()
        } else {
            Rational::new(1, n as i64)
        };
        PaymentLedger {
            payments: vec![BTreeMap::new(); n],
            remaining: vec![endowment.clone(); n],
            endowment,
            zero_utility: BTreeSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.remaining.len()
    }

    pub fn endowment(&self) -> &Rational {
        &self.endowment
    }

    pub fn remaining(&self, voter: VoterId) -> &Rational {
        &self.remaining[voter]
    }

    pub fn remaining_all(&self) -> &[Rational] {
        &self.remaining
    }

    pub fn payment(&self, voter: VoterId, c: CandidateId) -> Rational {
        self.payments[voter].get(&c).cloned().unwrap_or_default()
    }

    pub fn voter_payments(&self, voter: VoterId) -> &BTreeMap<CandidateId, Rational> {
        &self.payments[voter]
    }

    /// Sum of all payments towards `c`.
    pub fn paid_for(&self, c: CandidateId) -> Rational {
        self.payments.iter().filter_map(|p| p.get(&c)).sum()
    }

    pub fn total_paid(&self, voter: VoterId) -> Rational {
        self.payments[voter].values().sum()
    }

    /// All non-zero payments as `(voter, candidate, amount)`, ordered by voter
    /// then candidate.
    pub fn entries(&self) -> impl Iterator<Item = (VoterId, CandidateId, &Rational)> + '_ {
        self.payments
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(&c, amount)| (i, c, amount)))
    }

    /// Payments made by voters whose original utility for the candidate is 0
    /// (only produced by the exhaustive variant).
    pub fn zero_utility_payments(&self) -> &BTreeSet<(VoterId, CandidateId)> {
        &self.zero_utility
    }

    /// Records a payment. Panics if it would overdraw the voter.
    pub fn charge(&mut self, voter: VoterId, c: CandidateId, amount: Rational) {
        if amount.is_zero() {
            return;
        }
        assert!(
            !amount.is_negative() && amount <= self.remaining[voter],
            "voter {} cannot pay {amount} (remaining {})",
            voter + 1,
            self.remaining[voter]
        );
        self.remaining[voter] -= &amount;
        *self.payments[voter].entry(c).or_default() += amount;
    }

    pub(crate) fn flag_zero_utility(&mut self, voter: VoterId, c: CandidateId) {
        self.zero_utility.insert((voter, c));
    }

    /// The `(b, payments)` pair for this ledger.
    pub fn to_price_system(&self, b: Rational) -> crate::axioms::PriceSystem {
        crate::axioms::PriceSystem {
            b,
            payments: self
                .entries()
                .map(|(i, c, amount)| ((i, c), amount.clone()))
                .collect(),
        }
    }
}

/// The price level at which a trace step happened.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// Price per unit of utility (Rule X).
    Rho(Rational),
    /// Integer rank threshold (lexicographic Rule X).
    Rank(usize),
    /// Clock time of the continuous process (Phragmén).
    Time(Rational),
}

impl Level {
    /// `true` when `self` happens no later than `next` (same kind only).
    pub fn le(&self, next: &Level) -> bool {
        match (self, next) {
            (Level::Rho(a), Level::Rho(b)) | (Level::Time(a), Level::Time(b)) => a <= b,
            (Level::Rank(a), Level::Rank(b)) => a <= b,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub candidate: CandidateId,
    pub level: Level,
    pub payments: Vec<(VoterId, Rational)>,
    /// Every candidate that reached the same level in this round (includes
    /// `candidate`).
    pub tie_set: Vec<CandidateId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleTrace {
    pub steps: Vec<TraceStep>,
}

impl RuleTrace {
    pub fn elected_sequence(&self) -> Vec<CandidateId> {
        self.steps.iter().map(|s| s.candidate).collect()
    }

    pub fn levels(&self) -> impl Iterator<Item = &Level> + '_ {
        self.steps.iter().map(|s| &s.level)
    }

    /// Levels never decrease along the trace.
    pub fn is_monotone(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].level.le(&w[1].level))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleXOutput {
    pub outcome: Outcome,
    pub ledger: PaymentLedger,
    pub trace: RuleTrace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustiveOutput {
    pub run: RuleXOutput,
    /// The `eps` of the first of the two agreeing runs.
    pub eps_used: Rational,
}

/// Smallest `rho >= 0` with `sum_i min(remaining_i, u_i(c) * rho) = cost(c)`,
/// or `None` if the supporters together hold less than `cost(c)`.
///
/// The left-hand side is piecewise linear and non-decreasing in `rho`, with a
/// breakpoint at `remaining_i / u_i(c)` for every supporter still holding
/// money. The breakpoints are scanned in order and the linear equation is
/// solved on the segment where the sum crosses the cost.
pub fn min_rho(c: CandidateId, ledger: &PaymentLedger, e: &Election) -> Option<Rational> {
    let cost = e.cost(c);
    let mut points: Vec<(Rational, &Rational, &Rational)> = e
        .supporters(c)
        .iter()
        .filter_map(|&i| {
            let rem = ledger.remaining(i);
            if rem.is_positive() {
                let u = e.utility(i, c);
                Some((rem / u, rem, u))
            } else {
                None
            }
        })
        .collect();
    let total: Rational = points.iter().map(|p| p.1).sum();
    if total < *cost {
        return None;
    }
    points.sort_by(|a, b| a.0.cmp(&b.0));

    let mut capped = Rational::zero();
    let mut slope: Rational = points.iter().map(|p| p.2).sum();
    for (breakpoint, rem, u) in points {
        let rho = (cost - &capped) / &slope;
        if rho <= breakpoint {
            return Some(rho);
        }
        capped += rem;
        slope -= u;
    }
    unreachable!("total >= cost guarantees a crossing on the last segment")
}

/// `sum_i min(remaining_i, u_i(c) * rho)` evaluated directly.
pub fn affordability(c: CandidateId, rho: &Rational, ledger: &PaymentLedger, e: &Election) -> Rational {
    e.supporters(c)
        .iter()
        .map(|&i| {
            let pay = e.utility(i, c) * rho;
            pay.min_of(ledger.remaining(i).clone())
        })
        .sum()
}

/// Mutable state of one Rule X run.
#[derive(Clone)]
struct Run<'a> {
    e: &'a Election,
    ledger: PaymentLedger,
    elected: BTreeSet<CandidateId>,
    trace: RuleTrace,
}

impl<'a> Run<'a> {
    fn new(e: &'a Election, ledger: PaymentLedger, elected: BTreeSet<CandidateId>) -> Self {
        Run {
            e,
            ledger,
            elected,
            trace: RuleTrace::default(),
        }
    }

    /// Minimal rho over unelected candidates and every candidate attaining it.
    fn next_round(&self) -> Option<(Rational, Vec<CandidateId>)> {
        let mut best: Option<Rational> = None;
        let mut tied = Vec::new();
        for c in 0..self.e.m() {
            if self.elected.contains(&c) {
                continue;
            }
            let Some(rho) = min_rho(c, &self.ledger, self.e) else {
                continue;
            };
            match &best {
                Some(b) if rho > *b => {}
                Some(b) if rho == *b => tied.push(c),
                _ => {
                    best = Some(rho);
                    tied.clear();
                    tied.push(c);
                }
            }
        }
        best.map(|rho| (rho, tied))
    }

    fn buy(&mut self, c: CandidateId, rho: Rational, tied: Vec<CandidateId>) {
        let mut payments = Vec::new();
        for &i in self.e.supporters(c) {
            let rem = self.ledger.remaining(i);
            if !rem.is_positive() {
                continue;
            }
            let pay = (self.e.utility(i, c) * &rho).min_of(rem.clone());
            self.ledger.charge(i, c, pay.clone());
            payments.push((i, pay));
        }
        debug_assert_eq!(
            payments.iter().map(|p| &p.1).sum::<Rational>(),
            *self.e.cost(c)
        );
        self.elected.insert(c);
        self.trace.steps.push(TraceStep {
            candidate: c,
            level: Level::Rho(rho),
            payments,
            tie_set: tied,
        });
    }

    fn run(mut self, tie: TieBreak) -> RuleXOutput {
        while let Some((rho, tied)) = self.next_round() {
            let c = tie.pick(self.e, &tied);
            self.buy(c, rho, tied);
        }
        self.finish()
    }

    fn finish(self) -> RuleXOutput {
        RuleXOutput {
            outcome: Outcome::from_set(self.elected),
            ledger: self.ledger,
            trace: self.trace,
        }
    }
}

/// Runs Rule X from scratch.
pub fn run_rule_x(e: &Election, tie: TieBreak) -> RuleXOutput {
    Run::new(e, PaymentLedger::new(e.n()), BTreeSet::new()).run(tie)
}

/// Continues the Rule X loop from an existing outcome and ledger. Voters keep
/// whatever the ledger says they have left.
pub fn resume_rule_x(
    e: &Election,
    elected: &Outcome,
    ledger: PaymentLedger,
    tie: TieBreak,
) -> RuleXOutput {
    Run::new(e, ledger, elected.as_set().clone()).run(tie)
}

/// Follows every tie-breaking branch and returns one run per distinct
/// outcome, ordered by outcome.
///
/// Fails with [`Error::Refused`] once more than `max_branches` complete runs
/// have been explored.
pub fn run_rule_x_branches(e: &Election, max_branches: usize) -> Result<Vec<RuleXOutput>> {
    let mut found: BTreeMap<Outcome, RuleXOutput> = BTreeMap::new();
    let mut explored = 0usize;
    let mut stack = vec![Run::new(e, PaymentLedger::new(e.n()), BTreeSet::new())];
    while let Some(state) = stack.pop() {
        match state.next_round() {
            None => {
                explored += 1;
                if explored > max_branches {
                    return Err(Error::Refused {
                        what: "tie-breaking branches".into(),
                        actual: explored,
                        bound: max_branches,
                    });
                }
                let out = state.finish();
                found.entry(out.outcome.clone()).or_insert(out);
            }
            Some((rho, tied)) => {
                for &c in tied.iter().rev() {
                    let mut next = state.clone();
                    next.buy(c, rho.clone(), tied.clone());
                    stack.push(next);
                }
            }
        }
    }
    Ok(found.into_values().collect())
}

/// Rule X on the instance where every zero utility is raised to `eps`.
///
/// Requires `0 < eps < min positive utility`. Payments by voters whose
/// original utility is zero are flagged in the ledger.
pub fn run_rule_x_eps(e: &Election, eps: &Rational, tie: TieBreak) -> Result<RuleXOutput> {
    if !eps.is_positive() || *eps >= e.min_positive_utility() {
        return Err(Error::Parameter(format!(
            "eps must lie in (0, {}), got {eps}",
            e.min_positive_utility()
        )));
    }
    Ok(run_perturbed(e, eps, tie))
}

fn run_perturbed(e: &Election, eps: &Rational, tie: TieBreak) -> RuleXOutput {
    let raised = e.with_zero_utilities_raised(eps);
    let mut out = run_rule_x(&raised, tie);
    let flagged: Vec<(VoterId, CandidateId)> = out
        .ledger
        .entries()
        .filter(|&(i, c, _)| e.utility(i, c).is_zero())
        .map(|(i, c, _)| (i, c))
        .collect();
    for (i, c) in flagged {
        out.ledger.flag_zero_utility(i, c);
    }
    out
}

/// Starting perturbation: `min positive utility / (n * m * D)` with `D` the lcm
/// of the cost denominators.
pub fn initial_eps(e: &Election) -> Rational {
    let scale = BigInt::from(e.n()) * BigInt::from(e.m()) * e.cost_denominator_lcm();
    e.min_positive_utility() / Rational::from_integer(scale)
}

pub const DEFAULT_MAX_HALVINGS: u32 = 64;

/// The limit outcome of the perturbed rule as `eps -> 0`.
pub fn run_rule_x_exhaustive(e: &Election, tie: TieBreak) -> Result<ExhaustiveOutput> {
    run_rule_x_exhaustive_with(e, tie, DEFAULT_MAX_HALVINGS)
}

/// Halves `eps` from [`initial_eps`] until two consecutive runs elect the same
/// candidate sequence.
pub fn run_rule_x_exhaustive_with(
    e: &Election,
    tie: TieBreak,
    max_halvings: u32,
) -> Result<ExhaustiveOutput> {
    let two = Rational::from_integer(2);
    let mut eps = initial_eps(e);
    let mut previous = run_perturbed(e, &eps, tie);
    for _ in 0..max_halvings {
        let next_eps = &eps / &two;
        let current = run_perturbed(e, &next_eps, tie);
        if current.trace.elected_sequence() == previous.trace.elected_sequence() {
            return Ok(ExhaustiveOutput {
                run: previous,
                eps_used: eps,
            });
        }
        previous = current;
        eps = next_eps;
    }
    let names = |out: &RuleXOutput| {
        out.trace
            .elected_sequence()
            .into_iter()
            .map(|c| e.name(c).to_string())
            .collect::<Vec<_>>()
    };
    let current = run_perturbed(e, &(&eps / &two), tie);
    Err(Error::NoStabilization {
        halvings: max_halvings,
        last_eps: eps,
        previous: names(&previous),
        current: names(&current),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn approval(costs: &[&str], approvals: Vec<Vec<CandidateId>>) -> Election {
        let candidates = costs
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("c{}", i + 1), q(c)))
            .collect();
        Election::from_approvals(candidates, approvals).unwrap()
    }

    /// Scaled Onetown: voters 1, 2 approve L1..L3 (2/9 each); voter 3 approves R (1/2).
    fn onetown() -> Election {
        let candidates = vec![
            ("L1".to_string(), q("2/9")),
            ("L2".to_string(), q("2/9")),
            ("L3".to_string(), q("2/9")),
            ("R".to_string(), q("1/2")),
        ];
        Election::from_approvals(candidates, vec![vec![0, 1, 2], vec![0, 1, 2], vec![3]]).unwrap()
    }

    #[test]
    fn single_linear_segment() {
        let e = approval(&["1/2"], vec![vec![0]]);
        assert_eq!(min_rho(0, &PaymentLedger::new(1), &e), Some(q("1/2")));
    }

    #[test]
    fn onetown_min_rho() {
        let e = onetown();
        let ledger = PaymentLedger::new(3);
        assert_eq!(min_rho(0, &ledger, &e), Some(q("1/9")));
        assert_eq!(min_rho(3, &ledger, &e), None);
    }

    #[test]
    fn crossing_after_a_capped_voter() {
        // Voter 1 holds 1/10, voter 2 holds 1/2; both utility 1; cost 1/2.
        // f(rho) = min(1/10, rho) + min(1/2, rho) = 1/2 at rho = 2/5.
        let e = approval(&["1/2"], vec![vec![0], vec![0]]);
        let mut ledger = PaymentLedger::new(2);
        ledger.charge(0, 0, q("2/5"));
        let rho = min_rho(0, &ledger, &e).unwrap();
        assert_eq!(rho, q("2/5"));
        assert_eq!(affordability(0, &rho, &ledger, &e), q("1/2"));
    }

    #[test]
    fn exact_budget_boundary_is_affordable() {
        let e = approval(&["1"], vec![vec![0], vec![0]]);
        assert_eq!(min_rho(0, &PaymentLedger::new(2), &e), Some(q("1/2")));
    }

    #[test]
    fn onetown_run() {
        let out = run_rule_x(&onetown(), TieBreak::LowestIndex);
        assert_eq!(out.outcome.to_vec(), vec![0, 1, 2]);
        assert_eq!(out.ledger.remaining(2), &q("1/3"));
        assert!(out.trace.levels().all(|l| *l == Level::Rho(q("1/9"))));
    }

    #[test]
    fn disjoint_unaffordable_singletons_elect_nothing() {
        let e = approval(&["1", "1"], vec![vec![0], vec![1]]);
        let out = run_rule_x(&e, TieBreak::LowestIndex);
        assert!(out.outcome.is_empty());
    }

    #[test]
    fn eps_variant_picks_one_by_tie_break() {
        let e = approval(&["1", "1"], vec![vec![0], vec![1]]);
        let out = run_rule_x_eps(&e, &q("1/1000"), TieBreak::LowestIndex).unwrap();
        assert_eq!(out.outcome.to_vec(), vec![0]);
        assert!(out.ledger.zero_utility_payments().contains(&(1, 0)));
        assert!(run_rule_x_eps(&e, &q("1"), TieBreak::LowestIndex).is_err());
        assert!(run_rule_x_eps(&e, &q("0"), TieBreak::LowestIndex).is_err());
    }

    #[test]
    fn eps_is_noop_on_positive_profiles() {
        let e = Election::new(
            vec![("a".into(), q("1/2")), ("b".into(), q("1/3"))],
            vec![
                vec![(0, q("1")), (1, q("1/4"))],
                vec![(0, q("1/5")), (1, q("1"))],
            ],
        )
        .unwrap();
        let plain = run_rule_x(&e, TieBreak::LowestIndex);
        let eps = run_rule_x_eps(&e, &q("1/100"), TieBreak::LowestIndex).unwrap();
        assert_eq!(plain, eps);
        let ex = run_rule_x_exhaustive(&e, TieBreak::LowestIndex).unwrap();
        assert_eq!(ex.run.outcome, plain.outcome);
        assert_eq!(ex.eps_used, initial_eps(&e));
    }

    #[test]
    fn exhaustive_variant_elects_one_of_two() {
        let e = approval(&["1", "1"], vec![vec![0], vec![1]]);
        let ex = run_rule_x_exhaustive(&e, TieBreak::LowestIndex).unwrap();
        assert_eq!(ex.run.outcome.len(), 1);
    }

    #[test]
    fn branches_cover_every_tie() {
        let e = approval(&["1", "1"], vec![vec![0, 1], vec![0, 1]]);
        let runs = run_rule_x_branches(&e, 100).unwrap();
        let outcomes: Vec<Vec<CandidateId>> = runs.iter().map(|r| r.outcome.to_vec()).collect();
        assert_eq!(outcomes, vec![vec![0], vec![1]]);
        assert!(run_rule_x_branches(&e, 1).is_err());
    }

    #[test]
    fn min_cost_tie_break() {
        // Both candidates first become affordable at rho = 1/2: c1 costs 1/2
        // with one supporter of utility 1; c2 costs 1/4 with one supporter of
        // utility 1/2.
        let e = Election::new(
            vec![("c1".into(), q("1/2")), ("c2".into(), q("1/4"))],
            vec![vec![(0, q("1"))], vec![(1, q("1/2"))]],
        )
        .unwrap();
        let low = run_rule_x(&e, TieBreak::LowestIndex);
        let cheap = run_rule_x(&e, TieBreak::MinCostThenIndex);
        assert_eq!(low.trace.steps[0].candidate, 0);
        assert_eq!(cheap.trace.steps[0].candidate, 1);
        assert_eq!(low.trace.steps[0].tie_set, vec![0, 1]);
    }
}
