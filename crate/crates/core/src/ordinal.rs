//! Ranked ballots: lexicographic Rule X, conversions to cardinal utilities
//! and the proportionality-for-solid-coalitions (PSC) check.
//!
//! All ranked elections are committee elections: `k` seats, each candidate
//! costing `1/k`. Positions are 1-based.

use std::collections::BTreeSet;

use crate::axioms::{Axiom, AxiomVerdict, Witness};
use crate::equal_shares::{Level, PaymentLedger, RuleTrace, RuleXOutput, TieBreak, TraceStep};
use crate::error::{Error, Result};
use crate::model::{CandidateId, Election, Outcome, VoterId};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedElection {
    names: Vec<String>,
    k: usize,
    rankings: Vec<Vec<CandidateId>>,
    /// `pos[i][c]`: 1-based position of `c` in voter `i`'s ranking.
    pos: Vec<Vec<usize>>,
}

impl RankedElection {
    /// Every ranking must list each candidate exactly once.
    pub fn new(names: Vec<String>, k: usize, rankings: Vec<Vec<CandidateId>>) -> Result<Self> {
        let m = names.len();
        if k == 0 {
            return Err(Error::InvalidElection("committee size must be positive".into()));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != m {
            return Err(Error::InvalidElection("duplicate candidate names".into()));
        }
        let mut pos = Vec::with_capacity(rankings.len());
        for (i, ranking) in rankings.iter().enumerate() {
            if ranking.len() != m {
                return Err(Error::InvalidElection(format!(
                    "voter {} ranks {} candidates, expected {m}",
                    i + 1,
                    ranking.len()
                )));
            }
            let mut row = vec![0; m];
            for (p, &c) in ranking.iter().enumerate() {
                if c >= m {
                    return Err(Error::Structural(format!(
                        "voter {} ranks unknown candidate index {c}",
                        i + 1
                    )));
                }
                if row[c] != 0 {
                    return Err(Error::InvalidElection(format!(
                        "voter {} ranks {} twice",
                        i + 1,
                        names[c]
                    )));
                }
                row[c] = p + 1;
            }
            pos.push(row);
        }
        Ok(RankedElection {
            names,
            k,
            rankings,
            pos,
        })
    }

    /// Builds rankings from candidate names.
    pub fn from_names<S: AsRef<str>>(names: &[S], k: usize, rankings: &[Vec<S>]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let index = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Structural(format!("unknown candidate {name:?}")))
        };
        let rankings = rankings
            .iter()
            .map(|r| r.iter().map(|s| index(s.as_ref())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, k, rankings)
    }

    pub fn n(&self) -> usize {
        self.rankings.len()
    }

    pub fn m(&self) -> usize {
        self.names.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, c: CandidateId) -> &str {
        &self.names[c]
    }

    pub fn candidate_index(&self, name: &str) -> Option<CandidateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn ranking(&self, voter: VoterId) -> &[CandidateId] {
        &self.rankings[voter]
    }

    pub fn pos(&self, voter: VoterId, c: CandidateId) -> usize {
        self.pos[voter][c]
    }

    /// The voter's `t` most preferred candidates.
    pub fn top(&self, voter: VoterId, t: usize) -> &[CandidateId] {
        &self.rankings[voter][..t]
    }

    pub fn cost(&self) -> Rational {
        Rational::new(1, self.k as i64)
    }

    pub fn outcome_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Outcome> {
        let ids = names
            .iter()
            .map(|s| {
                self.candidate_index(s.as_ref())
                    .ok_or_else(|| Error::Structural(format!("unknown candidate {:?}", s.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        self.outcome(ids)
    }

    /// An outcome of at most `k` candidates.
    pub fn outcome(&self, ids: impl IntoIterator<Item = CandidateId>) -> Result<Outcome> {
        let set: BTreeSet<CandidateId> = ids.into_iter().collect();
        if let Some(&c) = set.iter().find(|&&c| c >= self.m()) {
            return Err(Error::Structural(format!("unknown candidate index {c}")));
        }
        if set.len() > self.k {
            return Err(Error::Parameter(format!(
                "{} candidates exceed the committee size {}",
                set.len(),
                self.k
            )));
        }
        Ok(Outcome::from_set(set))
    }

    pub fn format_set<'a, I>(&self, set: I) -> String
    where
        I: IntoIterator<Item = &'a CandidateId>,
    {
        let names: Vec<&str> = set.into_iter().map(|&c| self.name(c)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// How to turn rankings into utilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CardinalScheme {
    /// `u_i(c) = m^(-pos_i(c))`: each position outweighs everything below it.
    LexExponential,
    /// `u_i(c) = (m - pos_i(c)) / (m - 1)`.
    Borda,
}

/// The cardinal election with costs `1/k`. Borda fails when some candidate is
/// ranked last by everyone, since nobody then has positive utility for it.
pub fn to_cardinal(re: &RankedElection, scheme: CardinalScheme) -> Result<Election> {
    let m = re.m();
    let utility = |p: usize| -> Rational {
        match scheme {
            CardinalScheme::LexExponential => Rational::from(m).pow(-(p as i32)),
            CardinalScheme::Borda if m == 1 => Rational::one(),
            CardinalScheme::Borda => Rational::new((m - p) as i64, (m - 1) as i64),
        }
    };
    let candidates = re.names().iter().map(|n| (n.clone(), re.cost())).collect();
    let utilities = (0..re.n())
        .map(|i| {
            (0..m)
                .map(|c| (c, utility(re.pos(i, c))))
                .filter(|(_, u)| u.is_positive())
                .collect()
        })
        .collect();
    Election::new(candidates, utilities).map_err(|err| match scheme {
        CardinalScheme::Borda => Error::Domain(format!("Borda conversion: {err}")),
        CardinalScheme::LexExponential => err,
    })
}

/// Rule X with lexicographic utilities.
///
/// The price `rho` runs over ranks `1..=m`; at rank `rho` a voter supports
/// every candidate placed at or above `rho`. A candidate is affordable at
/// `rho` when those supporters together hold at least `1/k`. The candidate
/// with the smallest such `rho` is bought, its supporters
/// splitting the cost equally, each capped by what they have left. The run
/// ends after `k` seats or when nothing is affordable.
///
/// All candidates cost the same, so every tie-break policy reduces to the
/// lowest index.
pub fn run_rule_x_lex(re: &RankedElection, _tie: TieBreak) -> RuleXOutput {
    let cost = re.cost();
    let mut ledger = PaymentLedger::new(re.n());
    let mut elected: BTreeSet<CandidateId> = BTreeSet::new();
    let mut trace = RuleTrace::default();

    'rounds: while elected.len() < re.k() {
        for rho in 1..=re.m() {
            let mut tied = Vec::new();
            for c in (0..re.m()).filter(|c| !elected.contains(c)) {
                let held: Rational = (0..re.n())
                    .filter(|&i| re.pos(i, c) <= rho)
                    .map(|i| ledger.remaining(i))
                    .sum();
                if held >= cost {
                    tied.push(c);
                }
            }
            let Some(&c) = tied.first() else {
                continue;
            };
            let payers: Vec<VoterId> = (0..re.n())
                .filter(|&i| re.pos(i, c) <= rho && ledger.remaining(i).is_positive())
                .collect();
            let payments = water_fill(&payers, &ledger, &cost);
            for (i, p) in &payments {
                ledger.charge(*i, c, p.clone());
            }
            elected.insert(c);
            trace.steps.push(TraceStep {
                candidate: c,
                level: Level::Rank(rho),
                payments,
                tie_set: tied,
            });
            continue 'rounds;
        }
        break;
    }
    RuleXOutput {
        outcome: Outcome::from_set(elected),
        ledger,
        trace,
    }
}

/// Splits `cost` among `payers` as equally as their remaining budgets allow:
/// everyone pays `min(remaining_i, tau)` for the `tau` that makes the total
/// exactly `cost`. Requires the payers to hold at least `cost` together.
fn water_fill(payers: &[VoterId], ledger: &PaymentLedger, cost: &Rational) -> Vec<(VoterId, Rational)> {
    let mut order: Vec<VoterId> = payers.to_vec();
    order.sort_by(|&a, &b| ledger.remaining(a).cmp(ledger.remaining(b)).then(a.cmp(&b)));
    let mut left = cost.clone();
    let mut tau = Rational::zero();
    for (idx, &i) in order.iter().enumerate() {
        let share = &left / Rational::from(order.len() - idx);
        let rem = ledger.remaining(i);
        if *rem >= share {
            tau = share;
            break;
        }
        left -= rem;
    }
    let mut out: Vec<(VoterId, Rational)> = payers
        .iter()
        .map(|&i| (i, ledger.remaining(i).clone().min_of(tau.clone())))
        .collect();
    out.sort_by_key(|p| p.0);
    out
}

/// PSC: every group solidly ranking a set `T` on top, and large enough to be
/// owed `l` seats (`|S| >= n l / k`), gets at least `min(l, |T|)` of `T`.
///
/// A voter solidly supports `T` exactly when `T` is the set of their top `|T|`
/// candidates, so only the `n * m` rank prefixes need checking, each with its
/// full solid group and the largest owed `l`. The lexicographically smallest
/// violating `T` is reported.
pub fn check_psc(re: &RankedElection, w: &Outcome) -> Result<AxiomVerdict> {
    if w.len() > re.k() {
        return Err(Error::Parameter(format!(
            "outcome has {} candidates, committee size is {}",
            w.len(),
            re.k()
        )));
    }
    let mut prefixes: BTreeSet<Vec<CandidateId>> = BTreeSet::new();
    for i in 0..re.n() {
        for t in 1..=re.m() {
            let mut set = re.top(i, t).to_vec();
            set.sort_unstable();
            prefixes.insert(set);
        }
    }
    for t in prefixes {
        let group = solid_group(re, &t);
        let ell = owed_seats(re, group.len());
        let have = t.iter().filter(|c| w.contains(**c)).count();
        if have < ell.min(t.len()) {
            return Ok(AxiomVerdict::violated(
                Axiom::Psc,
                Witness {
                    voters: group,
                    candidates: t,
                    ell: Some(ell),
                    ..Witness::default()
                },
            ));
        }
    }
    Ok(AxiomVerdict::satisfied(Axiom::Psc))
}

/// Voters whose top `|t|` candidates are exactly `t` (sorted).
fn solid_group(re: &RankedElection, t: &[CandidateId]) -> Vec<VoterId> {
    (0..re.n())
        .filter(|&i| {
            let mut top = re.top(i, t.len()).to_vec();
            top.sort_unstable();
            top == t
        })
        .collect()
}

/// Largest `l <= k` with `size >= n l / k`.
fn owed_seats(re: &RankedElection, size: usize) -> usize {
    if re.n() == 0 {
        return 0;
    }
    (size * re.k() / re.n()).min(re.k())
}

/// Direct evaluation of a PSC witness.
pub fn is_psc_violation(re: &RankedElection, w: &Outcome, s: &[VoterId], t: &[CandidateId], ell: usize) -> bool {
    let mut sorted = t.to_vec();
    sorted.sort_unstable();
    !t.is_empty()
        && ell >= 1
        && ell <= re.k()
        && s.len() * re.k() >= re.n() * ell
        && s.iter().all(|&i| {
            let mut top = re.top(i, t.len()).to_vec();
            top.sort_unstable();
            top == sorted
        })
        && t.iter().filter(|c| w.contains(**c)).count() < ell.min(t.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn cyclic() -> RankedElection {
        RankedElection::from_names(
            &["c1", "c2", "c3", "c4"],
            2,
            &[
                vec!["c1", "c2", "c3", "c4"],
                vec!["c2", "c3", "c1", "c4"],
                vec!["c3", "c1", "c2", "c4"],
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(RankedElection::new(vec!["a".into(), "b".into()], 1, vec![vec![0, 0]]).is_err());
        assert!(RankedElection::new(vec!["a".into(), "b".into()], 1, vec![vec![0]]).is_err());
        assert!(RankedElection::new(vec!["a".into()], 0, vec![vec![0]]).is_err());
    }

    #[test]
    fn single_voter_gets_top_choice() {
        let re = RankedElection::from_names(&["a", "b"], 1, &[vec!["b", "a"]]).unwrap();
        let out = run_rule_x_lex(&re, TieBreak::LowestIndex);
        assert_eq!(out.outcome.to_vec(), vec![1]);
        assert_eq!(out.trace.steps[0].level, Level::Rank(1));
    }

    #[test]
    fn cyclic_profile_trace() {
        let re = cyclic();
        let out = run_rule_x_lex(&re, TieBreak::LowestIndex);
        assert_eq!(out.outcome.to_vec(), vec![0, 1]);
        let first = &out.trace.steps[0];
        assert_eq!(first.level, Level::Rank(2));
        assert_eq!(first.tie_set, vec![0, 1, 2]);
        assert_eq!(first.payments, vec![(0, q("1/4")), (2, q("1/4"))]);
        assert_eq!(out.trace.steps[1].level, Level::Rank(3));
        assert!(check_psc(&re, &out.outcome).unwrap().is_satisfied());
    }

    #[test]
    fn psc_needs_two_of_the_top_three() {
        let re = cyclic();
        let w = re.outcome_by_names(&["c1", "c4"]).unwrap();
        let v = check_psc(&re, &w).unwrap();
        assert!(v.is_violated());
        let wit = v.witness.unwrap();
        assert_eq!(wit.candidates, vec![0, 1, 2]);
        assert_eq!(wit.ell, Some(2));
        assert!(is_psc_violation(&re, &w, &wit.voters, &wit.candidates, 2));
    }

    #[test]
    fn water_filling_caps_poor_voters() {
        let mut ledger = PaymentLedger::new(3);
        ledger.charge(0, 0, q("1/4"));
        let pays = water_fill(&[0, 1, 2], &ledger, &q("1/2"));
        assert_eq!(pays, vec![(0, q("1/12")), (1, q("5/24")), (2, q("5/24"))]);
    }

    #[test]
    fn conversions() {
        let re = RankedElection::from_names(&["a", "b"], 1, &[vec!["a", "b"]]).unwrap();
        let lex = to_cardinal(&re, CardinalScheme::LexExponential).unwrap();
        assert_eq!(lex.utility(0, 0), &q("1/2"));
        assert_eq!(lex.utility(0, 1), &q("1/4"));
        // Borda gives the last-ranked candidate nothing: b is unsupported.
        assert!(to_cardinal(&re, CardinalScheme::Borda).is_err());

        let re = RankedElection::from_names(&["a", "b", "c"], 1, &[vec!["a", "b", "c"], vec!["c", "b", "a"]])
            .unwrap();
        let borda = to_cardinal(&re, CardinalScheme::Borda).unwrap();
        let row: Vec<Rational> = borda.utility_row(0).to_vec();
        assert_eq!(row, vec![q("1"), q("1/2"), q("0")]);
    }

    #[test]
    fn lex_exponential_dominance() {
        let re = cyclic();
        let e = to_cardinal(&re, CardinalScheme::LexExponential).unwrap();
        for i in 0..re.n() {
            for c in 0..re.m() {
                let below: Rational = (0..re.m())
                    .filter(|&d| re.pos(i, d) > re.pos(i, c))
                    .map(|d| e.utility(i, d).clone())
                    .sum();
                assert!(*e.utility(i, c) > below);
            }
        }
    }
}
