//! One entry point per rule and per axiom over parsed instances, shared by the
//! command line and the fixture expectations.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::axioms::{
    alpha_core_bound, check_alpha_core, check_core, check_ejr, check_ejr_approval, check_ejr_strict,
    check_exhaustive, check_fjr, find_price_system, Axiom, AxiomVerdict, PriceSystem, SearchBounds,
    Witness,
};
use crate::baselines::{run_pav_with, run_phragmen, PhragmenOptions, MAX_PAV_CANDIDATES};
use crate::equal_shares::{run_rule_x, run_rule_x_exhaustive, PaymentLedger, RuleTrace, TieBreak};
use crate::error::{Error, Result};
use crate::gcr::{run_gcr, CohesiveRound, GcrBounds};
use crate::io::{round_documents, step_documents, Instance, PriceSystemDocument, RunDocument};
use crate::model::{Election, Outcome};
use crate::ordinal::{check_psc, run_rule_x_lex, to_cardinal, CardinalScheme};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    EqualShares,
    EqualSharesExhaustive,
    Gcr,
    Pav,
    Phragmen,
    EqualSharesLex,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::EqualShares => "equal-shares",
            Rule::EqualSharesExhaustive => "equal-shares-exhaustive",
            Rule::Gcr => "gcr",
            Rule::Pav => "pav",
            Rule::Phragmen => "phragmen",
            Rule::EqualSharesLex => "equal-shares-lex",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub tie: TieBreak,
    pub phragmen_skip: bool,
    /// Utilities used when a cardinal rule runs on a ranked instance.
    pub scheme: CardinalScheme,
    pub gcr: GcrBounds,
    pub pav_max_candidates: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tie: TieBreak::default(),
            phragmen_skip: false,
            scheme: CardinalScheme::LexExponential,
            gcr: GcrBounds::default(),
            pav_max_candidates: MAX_PAV_CANDIDATES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub rule: Rule,
    pub outcome: Outcome,
    /// Every optimal outcome when the rule has ties (PAV); `outcome` is the
    /// smallest of them.
    pub tied_outcomes: Vec<Outcome>,
    pub trace: Option<RuleTrace>,
    pub ledger: Option<PaymentLedger>,
    pub rounds: Vec<CohesiveRound>,
    pub eps: Option<Rational>,
}

impl RunReport {
    fn new(rule: Rule, outcome: Outcome) -> Self {
        RunReport {
            rule,
            outcome,
            tied_outcomes: Vec::new(),
            trace: None,
            ledger: None,
            rounds: Vec::new(),
            eps: None,
        }
    }

    /// `with_trace` adds the per-step payments and the price system.
    pub fn document(&self, inst: &Instance, with_trace: bool) -> RunDocument {
        let names = |w: &Outcome| inst.names_of(w);
        RunDocument {
            rule: self.rule.name().to_string(),
            outcome: names(&self.outcome),
            total_cost: inst.total_cost(&self.outcome),
            tied_outcomes: if self.tied_outcomes.len() > 1 {
                self.tied_outcomes.iter().map(names).collect()
            } else {
                Vec::new()
            },
            eps: self.eps.clone(),
            rounds: round_documents(inst, &self.rounds),
            steps: self
                .trace
                .as_ref()
                .filter(|_| with_trace)
                .map(|t| step_documents(inst, t)),
            price_system: self.ledger.as_ref().filter(|_| with_trace).map(|l| {
                PriceSystemDocument::from_price_system(&l.to_price_system(Rational::one()), candidate_names(inst))
            }),
        }
    }
}

fn candidate_names(inst: &Instance) -> &[String] {
    match inst {
        Instance::Cardinal(e) => e.names(),
        Instance::Ranked(re) => re.names(),
    }
}

/// The instance as a cardinal election; ranked instances are converted.
pub fn cardinal_view(inst: &Instance, scheme: CardinalScheme) -> Result<Cow<'_, Election>> {
    match inst {
        Instance::Cardinal(e) => Ok(Cow::Borrowed(e)),
        Instance::Ranked(re) => Ok(Cow::Owned(to_cardinal(re, scheme)?)),
    }
}

pub fn run_rule(inst: &Instance, rule: Rule, options: &RunOptions) -> Result<RunReport> {
    if rule == Rule::EqualSharesLex {
        let re = inst
            .as_ranked()
            .ok_or_else(|| Error::Domain("equal-shares-lex needs ranked ballots".into()))?;
        let out = run_rule_x_lex(re, options.tie);
        return Ok(RunReport {
            trace: Some(out.trace),
            ledger: Some(out.ledger),
            ..RunReport::new(rule, out.outcome)
        });
    }
    let e = cardinal_view(inst, options.scheme)?;
    let e = e.as_ref();
    Ok(match rule {
        Rule::EqualShares => {
            let out = run_rule_x(e, options.tie);
            RunReport {
                trace: Some(out.trace),
                ledger: Some(out.ledger),
                ..RunReport::new(rule, out.outcome)
            }
        }
        Rule::EqualSharesExhaustive => {
            let out = run_rule_x_exhaustive(e, options.tie)?;
            RunReport {
                trace: Some(out.run.trace),
                ledger: Some(out.run.ledger),
                eps: Some(out.eps_used),
                ..RunReport::new(rule, out.run.outcome)
            }
        }
        Rule::Gcr => {
            let out = run_gcr(e, options.gcr)?;
            RunReport {
                rounds: out.rounds,
                ..RunReport::new(rule, out.outcome)
            }
        }
        Rule::Pav => {
            let winners = run_pav_with(e, options.pav_max_candidates)?;
            let first = winners.first().cloned().unwrap_or_default();
            RunReport {
                tied_outcomes: winners,
                ..RunReport::new(rule, first)
            }
        }
        Rule::Phragmen => {
            let out = run_phragmen(
                e,
                PhragmenOptions {
                    tie: options.tie,
                    skip: options.phragmen_skip,
                },
            )?;
            RunReport {
                trace: Some(out.trace),
                ..RunReport::new(rule, out.outcome)
            }
        }
        Rule::EqualSharesLex => unreachable!("handled above"),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub bounds: SearchBounds,
    /// Defaults to [`alpha_core_bound`].
    pub alpha: Option<Rational>,
    pub scheme: CardinalScheme,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            bounds: SearchBounds::default(),
            alpha: None,
            scheme: CardinalScheme::LexExponential,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: AxiomVerdict,
    /// The system found by the `priceable` check.
    pub price_system: Option<PriceSystem>,
}

impl From<AxiomVerdict> for CheckReport {
    fn from(verdict: AxiomVerdict) -> Self {
        CheckReport {
            verdict,
            price_system: None,
        }
    }
}

pub fn check_axiom(inst: &Instance, axiom: Axiom, w: &Outcome, options: &CheckOptions) -> Result<CheckReport> {
    if axiom == Axiom::Psc {
        let re = inst
            .as_ranked()
            .ok_or_else(|| Error::Domain("PSC needs ranked ballots".into()))?;
        return Ok(check_psc(re, w)?.into());
    }
    let e = cardinal_view(inst, options.scheme)?;
    let e = e.as_ref();
    if w.total_cost(e) > Rational::one() {
        return Err(Error::Parameter(format!(
            "outcome {} costs more than the budget",
            e.format_set(w.iter())
        )));
    }
    let bounds = options.bounds;
    Ok(match axiom {
        Axiom::Ejr => check_ejr(e, w, bounds)?.into(),
        Axiom::EjrStrict => check_ejr_strict(e, w, bounds)?.into(),
        Axiom::EjrApproval => check_ejr_approval(e, w, bounds)?.into(),
        Axiom::Fjr => check_fjr(e, w, bounds)?.into(),
        Axiom::Core => check_core(e, w, bounds)?.into(),
        Axiom::AlphaCore => {
            let alpha = match &options.alpha {
                Some(a) => a.clone(),
                None => alpha_core_bound(e),
            };
            check_alpha_core(e, w, &alpha, bounds)?.into()
        }
        Axiom::Exhaustive => check_exhaustive(e, w).into(),
        Axiom::Priceable => match find_price_system(e, w)? {
            Some(ps) => CheckReport {
                verdict: AxiomVerdict::satisfied(Axiom::Priceable),
                price_system: Some(ps),
            },
            None => AxiomVerdict::violated(
                Axiom::Priceable,
                Witness {
                    candidates: w.to_vec(),
                    ..Witness::default()
                },
            )
            .into(),
        },
        Axiom::PriceSystem => {
            return Err(Error::Parameter(
                "checking a given price system needs the system itself; use certify".into(),
            ))
        }
        Axiom::Psc => unreachable!("handled above"),
    })
}
