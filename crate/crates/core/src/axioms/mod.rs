//! Checkers for the proportionality axioms.
//!
//! Every checker either finds a violation (with a witness that re-verifies
//! through a direct predicate), proves there is none, or reports that a search
//! bound was hit. Bundles `T` are enumerated in lexicographic order of their
//! sorted index lists, so the reported witness is the smallest violating `T`.

mod cohesive;
mod ejr;
mod lp;
mod price;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{CandidateId, Election, Outcome, VoterId};
use crate::rational::Rational;

pub use cohesive::{
    alpha_core_bound, check_alpha_core, check_core, check_fjr, is_alpha_core_violation,
    is_core_violation, is_fjr_violation, max_feasible_utility,
};
pub use ejr::{check_ejr, check_ejr_approval, check_ejr_strict, is_ejr_approval_violation, is_ejr_violation};
pub use lp::{solve_feasibility, Relation};
pub use price::{
    check_exhaustive, find_price_system, verify_price_system, verify_price_system_partial,
    PriceSystem, MAX_LP_VARIABLES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Ejr,
    EjrStrict,
    EjrApproval,
    Fjr,
    Core,
    AlphaCore,
    Priceable,
    PriceSystem,
    Exhaustive,
    Psc,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Ejr => "ejr",
            Axiom::EjrStrict => "ejr-strict",
            Axiom::EjrApproval => "ejr-approval",
            Axiom::Fjr => "fjr",
            Axiom::Core => "core",
            Axiom::AlphaCore => "alpha-core",
            Axiom::Priceable => "priceable",
            Axiom::PriceSystem => "price-system",
            Axiom::Exhaustive => "exhaustive",
            Axiom::Psc => "psc",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Satisfied,
    Violated,
    Inconclusive,
}

/// A violating group `S` and bundle `T`, plus whichever parameter the axiom
/// uses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub voters: Vec<VoterId>,
    pub candidates: Vec<CandidateId>,
    /// Per-candidate thresholds of an EJR violation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<BTreeMap<CandidateId, Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Rational>,
    /// Number of seats a solid coalition is owed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// Which price-system condition failed (`"C1"` .. `"C5"`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<SearchBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl AxiomVerdict {
    pub fn satisfied(axiom: Axiom) -> Self {
        AxiomVerdict {
            axiom,
            status: Status::Satisfied,
            witness: None,
            bounds: None,
            detail: None,
        }
    }

    pub fn violated(axiom: Axiom, witness: Witness) -> Self {
        AxiomVerdict {
            axiom,
            status: Status::Violated,
            witness: Some(witness),
            bounds: None,
            detail: None,
        }
    }

    pub fn inconclusive(axiom: Axiom, detail: impl Into<String>) -> Self {
        AxiomVerdict {
            axiom,
            status: Status::Inconclusive,
            witness: None,
            bounds: None,
            detail: Some(detail.into()),
        }
    }

    pub(crate) fn with_bounds(mut self, bounds: SearchBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub(crate) fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn is_satisfied(&self) -> bool {
        self.status == Status::Satisfied
    }

    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }

    pub fn is_inconclusive(&self) -> bool {
        self.status == Status::Inconclusive
    }
}

/// Limits on the brute-force searches.
///
/// `max_candidates` caps the number of candidates whose subsets are
/// enumerated; `max_voters` caps voter-subset enumeration at `2^max_voters`
/// groups per bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_candidates: usize,
    pub max_voters: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_candidates: 20,
            max_voters: 12,
        }
    }
}

pub const SEARCH_BOUND_ENV: &str = "PB_SEARCH_BOUND";

impl SearchBounds {
    /// Defaults, overridden by `PB_SEARCH_BOUND` when set. The variable holds
    /// either one integer (applied to both limits) or `m=<k>,n=<k>` with
    /// either part optional.
    pub fn from_env() -> crate::error::Result<Self> {
        match std::env::var(SEARCH_BOUND_ENV) {
            Ok(value) => Self::default().overridden_by(&value),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn overridden_by(mut self, spec: &str) -> crate::error::Result<Self> {
        let bad = || {
            crate::error::Error::Parameter(format!(
                "{SEARCH_BOUND_ENV} must be an integer or `m=<k>,n=<k>`, got {spec:?}"
            ))
        };
        let spec = spec.trim();
        if let Ok(k) = spec.parse::<usize>() {
            self.max_candidates = k;
            self.max_voters = k;
            return Ok(self);
        }
        for part in spec.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let value: usize = value.trim().parse().map_err(|_| bad())?;
            match key.trim() {
                "m" => self.max_candidates = value,
                "n" => self.max_voters = value,
                _ => return Err(bad()),
            }
        }
        Ok(self)
    }

    pub(crate) fn max_groups(&self) -> u128 {
        1u128 << self.max_voters.min(120)
    }
}

/// What the bundle visitor wants next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    Descend,
    SkipSupersets,
    Stop,
}

/// Visits every non-empty bundle with `cost(T) <= 1` in lexicographic order
/// (pre-order DFS over sorted index lists). Bundles over budget are skipped
/// together with their supersets: no group of at most `n` voters can have
/// `|S| >= cost(T) * n` for them.
pub(crate) fn for_each_bundle<F>(e: &Election, mut visit: F)
where
    F: FnMut(&[CandidateId], &Rational) -> Step,
{
    fn go<F>(e: &Election, start: usize, bundle: &mut Vec<CandidateId>, cost: &Rational, visit: &mut F) -> bool
    where
        F: FnMut(&[CandidateId], &Rational) -> Step,
    {
        for c in start..e.m() {
            let next_cost = cost + e.cost(c);
            if next_cost > Rational::one() {
                continue;
            }
            bundle.push(c);
            let step = visit(bundle, &next_cost);
            let stop = match step {
                Step::Stop => true,
                Step::SkipSupersets => false,
                Step::Descend => go(e, c + 1, bundle, &next_cost, visit),
            };
            bundle.pop();
            if stop {
                return true;
            }
        }
        false
    }
    go(e, 0, &mut Vec::new(), &Rational::zero(), &mut visit);
}

/// `|S| >= cost(T) * n`, compared exactly.
pub(crate) fn is_large_enough(e: &Election, group_size: usize, bundle_cost: &Rational) -> bool {
    Rational::from(group_size) >= bundle_cost * Rational::from(e.n())
}

/// Smallest group size `ceil(cost(T) * n)` that can claim `T`.
pub(crate) fn required_group_size(e: &Election, bundle_cost: &Rational) -> usize {
    (bundle_cost * Rational::from(e.n())).ceil_count()
}

pub(crate) fn outcome_utilities(e: &Election, w: &Outcome) -> Vec<Rational> {
    (0..e.n()).map(|i| e.voter_utility(i, w.iter())).collect()
}

pub(crate) fn too_many_candidates(axiom: Axiom, e: &Election, bounds: SearchBounds) -> Option<AxiomVerdict> {
    (e.m() > bounds.max_candidates).then(|| {
        AxiomVerdict::inconclusive(
            axiom,
            format!(
                "{} candidates exceed the search bound of {}",
                e.m(),
                bounds.max_candidates
            ),
        )
        .with_bounds(bounds)
    })
}
