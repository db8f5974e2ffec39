//! Registry of the worked instances, embedded from `fixtures/*.json`.
//!
//! Each file is an ordinary instance document whose `meta.expectations`
//! lists claims about it: rule outcomes, trace levels, checker verdicts.
//! [`Expectation::evaluate`] runs one claim.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::axioms::{Axiom, SearchBounds, Status};
use crate::equal_shares::Level;
use crate::error::{Error, Result};
use crate::gcr::{run_gcr_alternatives, GcrBounds};
use crate::io::{parse_instance_str, Instance, InstanceDocument};
use crate::model::{Election, Outcome};
use crate::rational::Rational;
use crate::runner::{cardinal_view, check_axiom, run_rule, CheckOptions, Rule, RunOptions};

const SOURCES: &[(&str, &str)] = &[
    ("onetown", include_str!("../fixtures/onetown.json")),
    ("twotown", include_str!("../fixtures/twotown.json")),
    ("circleville", include_str!("../fixtures/circleville.json")),
    ("pav-ejr-r3", include_str!("../fixtures/pav-ejr-r3.json")),
    ("core-empty-6", include_str!("../fixtures/core-empty-6.json")),
    ("priceable-vs-exhaustive", include_str!("../fixtures/priceable-vs-exhaustive.json")),
    ("rulex-fjr-22", include_str!("../fixtures/rulex-fjr-22.json")),
    ("pav-fjr-6", include_str!("../fixtures/pav-fjr-6.json")),
    ("laminar-4", include_str!("../fixtures/laminar-4.json")),
    ("nearly-laminar-4000", include_str!("../fixtures/nearly-laminar-4000.json")),
    ("ordinal-psc-3", include_str!("../fixtures/ordinal-psc-3.json")),
    ("ordinal-ejr-2", include_str!("../fixtures/ordinal-ejr-2.json")),
    ("ordinal-gcr-12", include_str!("../fixtures/ordinal-gcr-12.json")),
    ("phragmen-waste-100", include_str!("../fixtures/phragmen-waste-100.json")),
];

/// Registered fixture ids, in registry order.
pub fn fixture_ids() -> Vec<&'static str> {
    SOURCES.iter().map(|(id, _)| *id).collect()
}

/// The raw embedded document.
pub fn fixture_source(id: &str) -> Result<&'static str> {
    SOURCES
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::UnknownFixture(id.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub id: String,
    pub description: String,
    pub instance: Instance,
    pub expectations: Vec<Expectation>,
}

impl Fixture {
    /// The cardinal election, if the fixture is not ranked.
    pub fn election(&self) -> Option<&Election> {
        self.instance.as_cardinal()
    }
}

#[derive(Deserialize)]
struct Meta {
    description: String,
    #[serde(default)]
    expectations: Vec<Expectation>,
}

pub fn load_fixture(id: &str) -> Result<Fixture> {
    let text = fixture_source(id)?;
    let doc: InstanceDocument = serde_json::from_str(text)
        .map_err(|e| Error::Internal(format!("fixture {id}: {e}")))?;
    let meta: Meta = serde_json::from_value(doc.meta.clone())
        .map_err(|e| Error::Internal(format!("fixture {id} meta: {e}")))?;
    Ok(Fixture {
        id: id.to_string(),
        description: meta.description,
        instance: parse_instance_str(text)?,
        expectations: meta.expectations,
    })
}

/// Multiplies every block of identical voters by `factor`. Fails unless each
/// block size times `factor` is a positive integer.
pub fn scale_population(e: &Election, factor: &Rational) -> Result<Election> {
    if !factor.is_positive() {
        return Err(Error::Parameter(format!("scale factor must be positive, got {factor}")));
    }
    let blocks = e
        .voter_blocks()
        .into_iter()
        .map(|(rep, count)| {
            let scaled = Rational::from(count) * factor;
            if !scaled.is_integer() || scaled.is_zero() {
                return Err(Error::Parameter(format!(
                    "block of {count} voters like voter {} does not scale by {factor}",
                    rep + 1
                )));
            }
            Ok((rep, scaled.floor_count()))
        })
        .collect::<Result<Vec<_>>>()?;
    e.from_voter_blocks(&blocks)
}

/// A claim about a fixture, as stored in its `meta.expectations`.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct Expectation {
    /// Short human-readable name.
    pub label: String,
    /// Evaluate on the population scaled by this factor.
    #[serde(default)]
    pub scale: Option<Rational>,
    /// Set when the claim is known not to hold under the implemented
    /// definitions, with the reason.
    #[serde(default)]
    pub deviation: Option<String>,
    #[serde(flatten)]
    pub claim: Claim,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Claim {
    Shape {
        n: usize,
        m: usize,
        /// Every candidate costs this.
        #[serde(default)]
        unit_cost: Option<Rational>,
    },
    Run {
        rule: Rule,
        outcome: Vec<String>,
        /// All tied optimal outcomes (PAV).
        #[serde(default)]
        tied: Option<Vec<Vec<String>>>,
        /// Trace levels in order (`rho`, time or rank).
        #[serde(default)]
        levels: Option<Vec<Rational>>,
        /// Per-round `beta` of a cohesive-rule run.
        #[serde(default)]
        betas: Option<Vec<Rational>>,
    },
    Check {
        axiom: Axiom,
        outcome: Vec<String>,
        status: Status,
        #[serde(default)]
        witness_candidates: Option<Vec<String>>,
        /// 1-based.
        #[serde(default)]
        witness_voters: Option<Vec<usize>>,
        #[serde(default)]
        beta: Option<Rational>,
    },
    /// The same verdict for every feasible outcome.
    CheckAll { axiom: Axiom, status: Status },
    /// Some tie-breaking of the cohesive rule elects this outcome.
    GcrAlternatives { contains: Vec<String> },
}

/// What evaluating an expectation found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub holds: bool,
    pub observed: String,
}

fn compare<T: PartialEq + std::fmt::Debug>(what: &str, expected: &T, actual: &T, mismatches: &mut Vec<String>) {
    if expected != actual {
        mismatches.push(format!("{what}: expected {expected:?}, got {actual:?}"));
    }
}

const MAX_GCR_BRANCHES: usize = 100_000;

impl Expectation {
    pub fn evaluate(&self, fixture: &Fixture) -> Result<Evaluation> {
        let scaled;
        let inst = match (&self.scale, &fixture.instance) {
            (None, inst) => inst,
            (Some(f), Instance::Cardinal(e)) => {
                scaled = Instance::Cardinal(scale_population(e, f)?);
                &scaled
            }
            (Some(_), Instance::Ranked(_)) => {
                return Err(Error::Domain("ranked fixtures are not scaled".into()));
            }
        };
        let mut mismatches = Vec::new();
        let observed = match &self.claim {
            Claim::Shape { n, m, unit_cost } => {
                compare("n", n, &inst.n(), &mut mismatches);
                compare("m", m, &inst.m(), &mut mismatches);
                if let Some(cost) = unit_cost {
                    for c in 0..inst.m() {
                        compare(&format!("cost of {}", inst.name(c)), cost, &inst.cost(c), &mut mismatches);
                    }
                }
                format!("n = {}, m = {}", inst.n(), inst.m())
            }
            Claim::Run {
                rule,
                outcome,
                tied,
                levels,
                betas,
            } => {
                let report = run_rule(inst, *rule, &RunOptions::default())?;
                let got = inst.names_of(&report.outcome);
                compare("outcome", outcome, &got, &mut mismatches);
                if let Some(tied) = tied {
                    let all: Vec<Vec<String>> = report.tied_outcomes.iter().map(|w| inst.names_of(w)).collect();
                    compare("tied outcomes", tied, &all, &mut mismatches);
                }
                if let Some(levels) = levels {
                    let got: Vec<Rational> = report
                        .trace
                        .iter()
                        .flat_map(|t| t.levels())
                        .map(|l| match l {
                            Level::Rho(q) | Level::Time(q) => q.clone(),
                            Level::Rank(r) => Rational::from(*r),
                        })
                        .collect();
                    compare("levels", levels, &got, &mut mismatches);
                }
                if let Some(betas) = betas {
                    let got: Vec<Rational> = report.rounds.iter().map(|r| r.beta.clone()).collect();
                    compare("betas", betas, &got, &mut mismatches);
                }
                inst.format_set(report.outcome.iter())
            }
            Claim::Check {
                axiom,
                outcome,
                status,
                witness_candidates,
                witness_voters,
                beta,
            } => {
                let w = inst.outcome_by_names(outcome)?;
                let verdict = check_axiom(inst, *axiom, &w, &check_options())?.verdict;
                compare("status", status, &verdict.status, &mut mismatches);
                let witness = verdict.witness.clone().unwrap_or_default();
                if let Some(expected) = witness_candidates {
                    let got: Vec<String> = witness.candidates.iter().map(|&c| inst.name(c).to_string()).collect();
                    compare("witness candidates", expected, &got, &mut mismatches);
                }
                if let Some(expected) = witness_voters {
                    let got: Vec<usize> = witness.voters.iter().map(|i| i + 1).collect();
                    compare("witness voters", expected, &got, &mut mismatches);
                }
                if let Some(expected) = beta {
                    compare("beta", &Some(expected.clone()), &witness.beta, &mut mismatches);
                }
                match &verdict.witness {
                    Some(wit) => format!(
                        "{:?} with T = {}, voters {:?}",
                        verdict.status,
                        inst.format_set(wit.candidates.iter()),
                        wit.voters.iter().map(|i| i + 1).collect::<Vec<_>>()
                    ),
                    None => format!("{:?}", verdict.status),
                }
            }
            Claim::CheckAll { axiom, status } => {
                let outcomes = feasible_outcomes(inst)?;
                let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                for w in &outcomes {
                    let verdict = check_axiom(inst, *axiom, w, &check_options())?.verdict;
                    if verdict.status != *status {
                        mismatches.push(format!("{}: {:?}", inst.format_set(w.iter()), verdict.status));
                    }
                    *counts.entry(format!("{:?}", verdict.status)).or_default() += 1;
                }
                format!("{} feasible outcomes: {counts:?}", outcomes.len())
            }
            Claim::GcrAlternatives { contains } => {
                let e = cardinal_view(inst, RunOptions::default().scheme)?;
                let alternatives = run_gcr_alternatives(&e, GcrBounds::default(), MAX_GCR_BRANCHES)?;
                let target = inst.outcome_by_names(contains)?;
                if !alternatives.iter().any(|a| a.outcome == target) {
                    mismatches.push(format!("{} is not among the alternatives", inst.format_set(target.iter())));
                }
                format!("{} distinct outcomes", alternatives.len())
            }
        };
        let observed = if mismatches.is_empty() {
            observed
        } else {
            format!("{observed} ({})", mismatches.join("; "))
        };
        Ok(Evaluation {
            holds: mismatches.is_empty(),
            observed,
        })
    }
}

fn check_options() -> CheckOptions {
    CheckOptions {
        bounds: SearchBounds::from_env().unwrap_or_default(),
        ..CheckOptions::default()
    }
}

/// Every subset of candidates within the budget. Only for small `m`.
pub fn feasible_outcomes(inst: &Instance) -> Result<Vec<Outcome>> {
    let m = inst.m();
    if m > 20 {
        return Err(Error::Refused {
            what: "candidates for outcome enumeration".into(),
            actual: m,
            bound: 20,
        });
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        let ids: Vec<usize> = (0..m).filter(|c| mask >> c & 1 == 1).collect();
        let cost: Rational = ids.iter().map(|&c| inst.cost(c)).sum();
        if cost <= Rational::one() {
            let names: Vec<&str> = ids.iter().map(|&c| inst.name(c)).collect();
            out.push(inst.outcome_by_names(&names)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_loads() {
        for id in fixture_ids() {
            let f = load_fixture(id).unwrap();
            assert!(!f.expectations.is_empty(), "{id}");
        }
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(load_fixture("nonexistent"), Err(Error::UnknownFixture(_))));
    }

    #[test]
    fn twotown_costs() {
        let f = load_fixture("twotown").unwrap();
        let e = f.election().unwrap();
        assert_eq!(e.m(), 4);
        assert!(e.costs().iter().all(|c| *c == Rational::new(1, 3)));
    }

    #[test]
    fn scaling() {
        let e = load_fixture("onetown").unwrap().election().unwrap().clone();
        let small = scale_population(&e, &Rational::new(1, 30000)).unwrap();
        assert_eq!(small.n(), 3);
        assert_eq!(small.supporters(0), &[0, 1]);
        assert_eq!(scale_population(&small, &Rational::one()).unwrap(), small);
        assert!(scale_population(&small, &Rational::new(1, 2)).is_err());
        assert!(scale_population(&small, &Rational::zero()).is_err());
        assert_eq!(scale_population(&small, &Rational::from(30000usize)).unwrap(), e);
    }
}
