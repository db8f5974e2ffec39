//! Election data model: voters, candidates with costs, additive utilities, and
//! outcomes. The budget is always normalized to 1.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Zero-based candidate index.
pub type CandidateId = usize;
/// Zero-based voter index.
pub type VoterId = usize;

/// An election with budget 1.
///
/// Immutable after construction. Utilities are stored densely (row per voter);
/// per-candidate supporter lists and per-voter positive-utility lists are kept
/// alongside for the rules that iterate over them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Election {
    n: usize,
    names: Vec<String>,
    costs: Vec<Rational>,
    utilities: Vec<Rational>,
    supporters: Vec<Vec<VoterId>>,
    liked: Vec<Vec<CandidateId>>,
}

/// Structural flags derived from an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionKind {
    /// Every utility is 0 or 1.
    pub is_approval: bool,
    /// `Some(k)` when every candidate costs exactly `1/k`.
    pub unit_cost: Option<u64>,
}

impl ElectionKind {
    pub fn is_unit_cost(&self) -> bool {
        self.unit_cost.is_some()
    }
}

impl Election {
    /// Builds an election from `(name, cost)` pairs and one sparse utility list
    /// per voter. Missing entries are zero.
    pub fn new(
        candidates: Vec<(String, Rational)>,
        utilities: Vec<Vec<(CandidateId, Rational)>>,
    ) -> Result<Self> {
        let m = candidates.len();
        let n = utilities.len();
        let mut names = Vec::with_capacity(m);
        let mut costs = Vec::with_capacity(m);
        let mut seen = HashMap::new();
        for (idx, (name, cost)) in candidates.into_iter().enumerate() {
            if seen.insert(name.clone(), idx).is_some() {
                return Err(Error::InvalidElection(format!(
                    "duplicate candidate id {name:?}"
                )));
            }
            if !cost.is_positive() {
                return Err(Error::InvalidElection(format!(
                    "candidate {name:?} has non-positive cost {cost}"
                )));
            }
            if cost > Rational::one() {
                return Err(Error::InvalidElection(format!(
                    "candidate {name:?} costs {cost}, more than the whole budget"
                )));
            }
            names.push(name);
            costs.push(cost);
        }

        let mut dense = vec![Rational::zero(); n * m];
        for (voter, row) in utilities.into_iter().enumerate() {
            for (c, u) in row {
                if c >= m {
                    return Err(Error::Structural(format!(
                        "voter {} references unknown candidate index {c}",
                        voter + 1
                    )));
                }
                if u.is_negative() || u > Rational::one() {
                    return Err(Error::InvalidElection(format!(
                        "utility of voter {} for {:?} is {u}, outside [0, 1]",
                        voter + 1,
                        names[c]
                    )));
                }
                let slot = &mut dense[voter * m + c];
                if !slot.is_zero() {
                    return Err(Error::InvalidElection(format!(
                        "voter {} lists {:?} twice",
                        voter + 1,
                        names[c]
                    )));
                }
                *slot = u;
            }
        }
        Self::from_dense(n, names, costs, dense)
    }

    /// Approval election: voter `i` has utility 1 for every candidate in
    /// `approvals[i]` and 0 otherwise.
    pub fn from_approvals(
        candidates: Vec<(String, Rational)>,
        approvals: Vec<Vec<CandidateId>>,
    ) -> Result<Self> {
        let utilities = approvals
            .into_iter()
            .map(|set| set.into_iter().map(|c| (c, Rational::one())).collect())
            .collect();
        Self::new(candidates, utilities)
    }

    fn from_dense(
        n: usize,
        names: Vec<String>,
        costs: Vec<Rational>,
        utilities: Vec<Rational>,
    ) -> Result<Self> {
        let m = names.len();
        let mut supporters = vec![Vec::new(); m];
        let mut liked = vec![Vec::new(); n];
        for i in 0..n {
            for c in 0..m {
                if utilities[i * m + c].is_positive() {
                    supporters[c].push(i);
                    liked[i].push(c);
                }
            }
        }
        if let Some(c) = supporters.iter().position(Vec::is_empty) {
            return Err(Error::InvalidElection(format!(
                "candidate {:?} has no voter with positive utility",
                names[c]
            )));
        }
        Ok(Election {
            n,
            names,
            costs,
            utilities,
            supporters,
            liked,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, c: CandidateId) -> &str {
        &self.names[c]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn candidate_index(&self, name: &str) -> Option<CandidateId> {
        self.names.iter().position(|x| x == name)
    }

    pub fn cost(&self, c: CandidateId) -> &Rational {
        &self.costs[c]
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn utility(&self, voter: VoterId, c: CandidateId) -> &Rational {
        &self.utilities[voter * self.m() + c]
    }

    /// The utility row of one voter, indexed by candidate.
    pub fn utility_row(&self, voter: VoterId) -> &[Rational] {
        let m = self.m();
        &self.utilities[voter * m..(voter + 1) * m]
    }

    /// Voters with positive utility for `c`, ascending.
    pub fn supporters(&self, c: CandidateId) -> &[VoterId] {
        &self.supporters[c]
    }

    /// Candidates for which `voter` has positive utility, ascending.
    pub fn liked(&self, voter: VoterId) -> &[CandidateId] {
        &self.liked[voter]
    }

    /// `u_i(T)` without id validation.
    pub fn voter_utility<'a, I>(&self, voter: VoterId, set: I) -> Rational
    where
        I: IntoIterator<Item = &'a CandidateId>,
    {
        let row = self.utility_row(voter);
        set.into_iter().map(|&c| &row[c]).sum()
    }

    /// `cost(T)` without id validation.
    pub fn cost_of<'a, I>(&self, set: I) -> Rational
    where
        I: IntoIterator<Item = &'a CandidateId>,
    {
        set.into_iter().map(|&c| &self.costs[c]).sum()
    }

    fn check_candidates(&self, set: &[CandidateId]) -> Result<()> {
        if let Some(&bad) = set.iter().find(|&&c| c >= self.m()) {
            return Err(Error::Structural(format!(
                "unknown candidate index {bad} (m = {})",
                self.m()
            )));
        }
        Ok(())
    }

    fn check_voters(&self, set: &[VoterId]) -> Result<()> {
        if let Some(&bad) = set.iter().find(|&&i| i >= self.n) {
            return Err(Error::Structural(format!(
                "unknown voter index {bad} (n = {})",
                self.n
            )));
        }
        Ok(())
    }

    /// Exact `cost(T)`.
    pub fn total_cost(&self, set: &[CandidateId]) -> Result<Rational> {
        self.check_candidates(set)?;
        Ok(self.cost_of(set))
    }

    /// Exact `u_S(T)`.
    pub fn group_utility(&self, voters: &[VoterId], set: &[CandidateId]) -> Result<Rational> {
        self.check_candidates(set)?;
        self.check_voters(voters)?;
        Ok(voters.iter().map(|&i| self.voter_utility(i, set)).sum())
    }

    /// `cost(T) <= 1`.
    pub fn is_feasible(&self, set: &[CandidateId]) -> Result<bool> {
        Ok(self.total_cost(set)? <= Rational::one())
    }

    pub fn kind(&self) -> ElectionKind {
        let is_approval = self
            .utilities
            .iter()
            .all(|u| u.is_zero() || *u == Rational::one());
        let unit_cost = match self.costs.first() {
            Some(first) if self.costs.iter().all(|c| c == first) && first.numer().is_one() => {
                first.denom().to_u64()
            }
            _ => None,
        };
        ElectionKind {
            is_approval,
            unit_cost,
        }
    }

    pub fn is_approval(&self) -> bool {
        self.kind().is_approval
    }

    /// Approval sets `A(i)`; only meaningful for approval elections.
    pub fn approval_set(&self, voter: VoterId) -> &[CandidateId] {
        self.liked(voter)
    }

    /// Smallest positive utility in the instance (1 when there are no
    /// candidates).
    pub fn min_positive_utility(&self) -> Rational {
        self.utilities
            .iter()
            .filter(|u| u.is_positive())
            .min()
            .cloned()
            .unwrap_or_else(Rational::one)
    }

    /// Least common multiple of all cost denominators.
    pub fn cost_denominator_lcm(&self) -> BigInt {
        crate::rational::lcm_of_denominators(&self.costs)
    }

    /// Groups voters with identical utility rows, in order of first appearance.
    /// Returns `(representative, count)` pairs.
    pub fn voter_blocks(&self) -> Vec<(VoterId, usize)> {
        let mut index: HashMap<&[Rational], usize> = HashMap::new();
        let mut blocks: Vec<(VoterId, usize)> = Vec::new();
        for i in 0..self.n {
            let row = self.utility_row(i);
            match index.get(row) {
                Some(&b) => blocks[b].1 += 1,
                None => {
                    index.insert(row, blocks.len());
                    blocks.push((i, 1));
                }
            }
        }
        blocks
    }

    /// A new election whose voters are `count` copies of each representative.
    pub fn from_voter_blocks(&self, blocks: &[(VoterId, usize)]) -> Result<Self> {
        let m = self.m();
        let n: usize = blocks.iter().map(|b| b.1).sum();
        let mut utilities = Vec::with_capacity(n * m);
        for &(rep, count) in blocks {
            self.check_voters(&[rep])?;
            for _ in 0..count {
                utilities.extend_from_slice(self.utility_row(rep));
            }
        }
        Self::from_dense(n, self.names.clone(), self.costs.clone(), utilities)
    }

    /// Same candidates and costs, with every zero utility replaced by `eps`.
    pub(crate) fn with_zero_utilities_raised(&self, eps: &Rational) -> Self {
        let utilities = self
            .utilities
            .iter()
            .map(|u| if u.is_zero() { eps.clone() } else { u.clone() })
            .collect();
        Self::from_dense(self.n, self.names.clone(), self.costs.clone(), utilities)
            .expect("raising utilities keeps every candidate supported")
    }

    pub fn outcome(&self, ids: impl IntoIterator<Item = CandidateId>) -> Result<Outcome> {
        Outcome::new(self, ids)
    }

    /// Builds an outcome from candidate names.
    pub fn outcome_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Outcome> {
        let ids = names
            .iter()
            .map(|s| {
                self.candidate_index(s.as_ref()).ok_or_else(|| {
                    Error::Structural(format!("unknown candidate {:?}", s.as_ref()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Outcome::new(self, ids)
    }

    pub fn ids_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<CandidateId>> {
        names
            .iter()
            .map(|s| {
                self.candidate_index(s.as_ref()).ok_or_else(|| {
                    Error::Structural(format!("unknown candidate {:?}", s.as_ref()))
                })
            })
            .collect()
    }

    /// `{a, b, c}` using candidate names.
    pub fn format_set<'a, I>(&self, set: I) -> String
    where
        I: IntoIterator<Item = &'a CandidateId>,
    {
        let parts: Vec<&str> = set.into_iter().map(|&c| self.name(c)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// A feasible set of selected candidates.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    selected: BTreeSet<CandidateId>,
}

impl Outcome {
    /// Validates ids and feasibility (`cost <= 1`).
    pub fn new(e: &Election, ids: impl IntoIterator<Item = CandidateId>) -> Result<Self> {
        let selected: BTreeSet<CandidateId> = ids.into_iter().collect();
        let as_vec: Vec<CandidateId> = selected.iter().copied().collect();
        if !e.is_feasible(&as_vec)? {
            return Err(Error::Parameter(format!(
                "outcome {} costs {}, more than the budget",
                e.format_set(&as_vec),
                e.cost_of(&as_vec)
            )));
        }
        Ok(Outcome { selected })
    }

    pub(crate) fn from_set(selected: BTreeSet<CandidateId>) -> Self {
        Outcome { selected }
    }

    pub fn empty() -> Self {
        Outcome::default()
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.selected.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CandidateId> + '_ {
        self.selected.iter()
    }

    pub fn to_vec(&self) -> Vec<CandidateId> {
        self.selected.iter().copied().collect()
    }

    pub fn as_set(&self) -> &BTreeSet<CandidateId> {
        &self.selected
    }

    pub fn total_cost(&self, e: &Election) -> Rational {
        e.cost_of(self.selected.iter())
    }

    pub fn names(&self, e: &Election) -> Vec<String> {
        self.selected.iter().map(|&c| e.name(c).to_string()).collect()
    }

    pub fn display(&self, e: &Election) -> String {
        e.format_set(self.selected.iter())
    }
}
