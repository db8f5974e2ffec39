//! JSON file formats: instances, outcomes, price systems, run traces and
//! verdicts. Every rational is written as a `"p/q"` string.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::axioms::{AxiomVerdict, PriceSystem, SearchBounds, Status};
use crate::equal_shares::{Level, RuleTrace};
use crate::error::{Error, Result};
use crate::gcr::CohesiveRound;
use crate::model::{CandidateId, Election, Outcome, VoterId};
use crate::ordinal::RankedElection;
use crate::rational::Rational;

pub const FORMAT_VERSION: u32 = 1;

/// A parsed instance: cardinal (including approval) or ranked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Cardinal(Election),
    Ranked(RankedElection),
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Cardinal(e) => e.n(),
            Instance::Ranked(re) => re.n(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Instance::Cardinal(e) => e.m(),
            Instance::Ranked(re) => re.m(),
        }
    }

    pub fn name(&self, c: CandidateId) -> &str {
        match self {
            Instance::Cardinal(e) => e.name(c),
            Instance::Ranked(re) => re.name(c),
        }
    }

    pub fn cost(&self, c: CandidateId) -> Rational {
        match self {
            Instance::Cardinal(e) => e.cost(c).clone(),
            Instance::Ranked(re) => re.cost(),
        }
    }

    pub fn outcome_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Outcome> {
        match self {
            Instance::Cardinal(e) => e.outcome_by_names(names),
            Instance::Ranked(re) => re.outcome_by_names(names),
        }
    }

    pub fn names_of(&self, w: &Outcome) -> Vec<String> {
        w.iter().map(|&c| self.name(c).to_string()).collect()
    }

    pub fn total_cost(&self, w: &Outcome) -> Rational {
        w.iter().map(|&c| self.cost(c)).sum()
    }

    pub fn format_set<'a, I>(&self, set: I) -> String
    where
        I: IntoIterator<Item = &'a CandidateId>,
    {
        let names: Vec<&str> = set.into_iter().map(|&c| self.name(c)).collect();
        format!("{{{}}}", names.join(", "))
    }

    pub fn as_cardinal(&self) -> Option<&Election> {
        match self {
            Instance::Cardinal(e) => Some(e),
            Instance::Ranked(_) => None,
        }
    }

    pub fn as_ranked(&self) -> Option<&RankedElection> {
        match self {
            Instance::Ranked(re) => Some(re),
            Instance::Cardinal(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub format_version: u32,
    /// Costs are divided by this, so they may be given in currency units.
    #[serde(default = "Rational::one")]
    pub budget: Rational,
    /// Required for ranked documents, where every candidate costs
    /// `budget / committee_size`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub committee_size: Option<usize>,
    pub candidates: Vec<CandidateEntry>,
    pub voters: Vec<VoterEntry>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub meta: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Rational>,
}

/// One voter, or `count` identical voters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoterEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approves: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<BTreeMap<String, Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<String>>,
}

impl Default for VoterEntry {
    fn default() -> Self {
        VoterEntry {
            id: None,
            count: 1,
            approves: None,
            utilities: None,
            ranking: None,
        }
    }
}

fn one() -> usize {
    1
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ballot {
    Approves,
    Utilities,
    Ranking,
}

impl Ballot {
    fn field(self) -> &'static str {
        match self {
            Ballot::Approves => "approves",
            Ballot::Utilities => "utilities",
            Ballot::Ranking => "ranking",
        }
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
}

pub fn parse_document(bytes: &[u8]) -> Result<InstanceDocument> {
    serde_json::from_slice(bytes).map_err(json_error)
}

pub fn parse_instance(bytes: &[u8]) -> Result<Instance> {
    parse_document(bytes)?.to_instance()
}

pub fn parse_instance_str(text: &str) -> Result<Instance> {
    parse_instance(text.as_bytes())
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read_file(path)?)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// Normalized pretty-printed document for `inst`; parsing it gives `inst` back.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(&InstanceDocument::from_instance(inst))
        .expect("documents always serialize");
    text.push('\n');
    text
}

impl InstanceDocument {
    pub fn to_instance(&self) -> Result<Instance> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::parse(
                "format_version",
                format!("unsupported version {}, expected {FORMAT_VERSION}", self.format_version),
            ));
        }
        if !self.budget.is_positive() {
            return Err(Error::parse("budget", format!("budget must be positive, got {}", self.budget)));
        }
        let mut index: BTreeMap<&str, CandidateId> = BTreeMap::new();
        for (j, c) in self.candidates.iter().enumerate() {
            if index.insert(c.id.as_str(), j).is_some() {
                return Err(Error::parse(format!("candidates[{j}].id"), format!("duplicate id {:?}", c.id)));
            }
        }
        let ballot = self.ballot_kind()?;
        let lookup = |name: &str, at: String| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::parse(at, format!("unknown candidate {name:?}")))
        };
        match ballot {
            Ballot::Ranking => self.to_ranked(&lookup),
            Ballot::Approves | Ballot::Utilities => self.to_cardinal(ballot, &lookup),
        }
    }

    fn ballot_kind(&self) -> Result<Ballot> {
        let mut kind = None;
        for (i, v) in self.voters.iter().enumerate() {
            let present: Vec<Ballot> = [
                (v.approves.is_some(), Ballot::Approves),
                (v.utilities.is_some(), Ballot::Utilities),
                (v.ranking.is_some(), Ballot::Ranking),
            ]
            .into_iter()
            .filter_map(|(p, b)| p.then_some(b))
            .collect();
            let b = match present.as_slice() {
                [b] => *b,
                _ => {
                    return Err(Error::parse(
                        format!("voters[{i}]"),
                        "each voter needs exactly one of `approves`, `utilities`, `ranking`",
                    ))
                }
            };
            match kind {
                Some(k) if k != b => {
                    return Err(Error::parse(
                        format!("voters[{i}].{}", b.field()),
                        format!("ballot type differs from earlier voters, which use `{}`", Ballot::field(k)),
                    ))
                }
                _ => kind = Some(b),
            }
            if v.count == 0 {
                return Err(Error::parse(format!("voters[{i}].count"), "count must be positive"));
            }
        }
        if kind.is_none() && self.committee_size.is_some() {
            return Ok(Ballot::Ranking);
        }
        Ok(kind.unwrap_or(Ballot::Utilities))
    }

    fn to_ranked(&self, lookup: &dyn Fn(&str, String) -> Result<CandidateId>) -> Result<Instance> {
        let k = self
            .committee_size
            .ok_or_else(|| Error::parse("committee_size", "ranked documents need a committee size"))?;
        if k == 0 {
            return Err(Error::parse("committee_size", "committee size must be positive"));
        }
        let seat = &self.budget / Rational::from(k);
        for (j, c) in self.candidates.iter().enumerate() {
            if let Some(cost) = &c.cost {
                if *cost != seat {
                    return Err(Error::parse(
                        format!("candidates[{j}].cost"),
                        format!("ranked candidates all cost budget/committee_size = {seat}, got {cost}"),
                    ));
                }
            }
        }
        let mut rankings = Vec::new();
        for (i, v) in self.voters.iter().enumerate() {
            let ranking = v.ranking.as_ref().expect("ballot kind checked");
            let ids = ranking
                .iter()
                .enumerate()
                .map(|(p, name)| lookup(name, format!("voters[{i}].ranking[{p}]")))
                .collect::<Result<Vec<_>>>()?;
            let mut seen = BTreeSet::new();
            for (p, &c) in ids.iter().enumerate() {
                if !seen.insert(c) {
                    return Err(Error::parse(format!("voters[{i}].ranking[{p}]"), format!("{:?} ranked twice", ranking[p])));
                }
            }
            if ids.len() != self.candidates.len() {
                return Err(Error::parse(
                    format!("voters[{i}].ranking"),
                    format!("ranks {} of {} candidates; rankings must be complete", ids.len(), self.candidates.len()),
                ));
            }
            rankings.extend(std::iter::repeat_n(ids, v.count));
        }
        let names = self.candidates.iter().map(|c| c.id.clone()).collect();
        Ok(Instance::Ranked(RankedElection::new(names, k, rankings)?))
    }

    fn to_cardinal(&self, ballot: Ballot, lookup: &dyn Fn(&str, String) -> Result<CandidateId>) -> Result<Instance> {
        if self.committee_size.is_some() {
            return Err(Error::parse("committee_size", "only ranked documents take a committee size"));
        }
        let mut candidates = Vec::with_capacity(self.candidates.len());
        for (j, c) in self.candidates.iter().enumerate() {
            let cost = c
                .cost
                .as_ref()
                .ok_or_else(|| Error::parse(format!("candidates[{j}].cost"), "missing cost"))?;
            let normalized = cost / &self.budget;
            if !normalized.is_positive() || normalized > Rational::one() {
                return Err(Error::parse(
                    format!("candidates[{j}].cost"),
                    format!("cost {cost} must be positive and at most the budget {}", self.budget),
                ));
            }
            candidates.push((c.id.clone(), normalized));
        }

        let mut supported = vec![false; candidates.len()];
        let mut rows: Vec<Vec<(CandidateId, Rational)>> = Vec::new();
        for (i, v) in self.voters.iter().enumerate() {
            let mut row: Vec<(CandidateId, Rational)> = Vec::new();
            let mut seen = BTreeSet::new();
            match ballot {
                Ballot::Approves => {
                    for (p, name) in v.approves.as_ref().expect("ballot kind checked").iter().enumerate() {
                        let at = format!("voters[{i}].approves[{p}]");
                        let c = lookup(name, at.clone())?;
                        if !seen.insert(c) {
                            return Err(Error::parse(at, format!("{name:?} approved twice")));
                        }
                        row.push((c, Rational::one()));
                    }
                }
                _ => {
                    for (name, u) in v.utilities.as_ref().expect("ballot kind checked") {
                        let at = format!("voters[{i}].utilities.{name}");
                        let c = lookup(name, at.clone())?;
                        if u.is_negative() || *u > Rational::one() {
                            return Err(Error::parse(at, format!("utility {u} outside [0, 1]")));
                        }
                        if u.is_positive() {
                            row.push((c, u.clone()));
                        }
                    }
                }
            }
            for (c, _) in &row {
                supported[*c] = true;
            }
            rows.extend(std::iter::repeat_n(row, v.count));
        }
        if let Some(j) = supported.iter().position(|s| !s) {
            return Err(Error::parse(
                format!("candidates[{j}]"),
                format!("no voter has positive utility for {:?}", self.candidates[j].id),
            ));
        }
        let e = match ballot {
            Ballot::Approves => Election::from_approvals(
                candidates,
                rows.into_iter().map(|r| r.into_iter().map(|(c, _)| c).collect()).collect(),
            )?,
            _ => Election::new(candidates, rows)?,
        };
        Ok(Instance::Cardinal(e))
    }

    /// Normalized document (budget 1). Consecutive voters with identical
    /// ballots share one entry.
    pub fn from_instance(inst: &Instance) -> Self {
        match inst {
            Instance::Cardinal(e) => Self::from_election(e),
            Instance::Ranked(re) => Self::from_ranked(re),
        }
    }

    fn from_election(e: &Election) -> Self {
        let approval = e.is_approval();
        let ballots: Vec<VoterEntry> = (0..e.n())
            .map(|i| {
                let liked = e.liked(i);
                if approval {
                    VoterEntry {
                        approves: Some(liked.iter().map(|&c| e.name(c).to_string()).collect()),
                        ..VoterEntry::default()
                    }
                } else {
                    VoterEntry {
                        utilities: Some(
                            liked
                                .iter()
                                .map(|&c| (e.name(c).to_string(), e.utility(i, c).clone()))
                                .collect(),
                        ),
                        ..VoterEntry::default()
                    }
                }
            })
            .collect();
        InstanceDocument {
            format_version: FORMAT_VERSION,
            budget: Rational::one(),
            committee_size: None,
            candidates: (0..e.m())
                .map(|c| CandidateEntry {
                    id: e.name(c).to_string(),
                    cost: Some(e.cost(c).clone()),
                })
                .collect(),
            voters: run_length(ballots),
            meta: serde_json::Value::Null,
        }
    }

    fn from_ranked(re: &RankedElection) -> Self {
        let ballots = (0..re.n())
            .map(|i| VoterEntry {
                ranking: Some(re.ranking(i).iter().map(|&c| re.name(c).to_string()).collect()),
                ..VoterEntry::default()
            })
            .collect();
        InstanceDocument {
            format_version: FORMAT_VERSION,
            budget: Rational::one(),
            committee_size: Some(re.k()),
            candidates: re
                .names()
                .iter()
                .map(|id| CandidateEntry {
                    id: id.clone(),
                    cost: None,
                })
                .collect(),
            voters: run_length(ballots),
            meta: serde_json::Value::Null,
        }
    }
}

/// Merges runs of equal ballots and labels them by 1-based voter positions.
fn run_length(ballots: Vec<VoterEntry>) -> Vec<VoterEntry> {
    let mut out: Vec<VoterEntry> = Vec::new();
    let mut start = 0;
    for ballot in ballots {
        match out.last_mut() {
            Some(last) if last.approves == ballot.approves
                && last.utilities == ballot.utilities
                && last.ranking == ballot.ranking =>
            {
                last.count += 1;
            }
            _ => out.push(ballot),
        }
    }
    for v in &mut out {
        v.id = Some(if v.count == 1 {
            format!("v{}", start + 1)
        } else {
            format!("v{}-v{}", start + 1, start + v.count)
        });
        start += v.count;
    }
    out
}

/// Reads an outcome argument: `outcome:{A,B}` (braces optional) or a path to
/// a file holding a JSON array of ids, a JSON object with an `outcome` array
/// (such as `run --json` output), or the same brace syntax as text.
pub fn parse_outcome_arg(arg: &str, inst: &Instance) -> Result<Outcome> {
    if let Some(list) = arg.strip_prefix("outcome:") {
        return inst.outcome_by_names(&split_names(list, "outcome argument")?);
    }
    let bytes = read_file(Path::new(arg))?;
    let text = String::from_utf8_lossy(&bytes);
    let trimmed = text.trim();
    #[derive(Deserialize)]
    struct WithOutcome {
        outcome: Vec<String>,
    }
    let names: Vec<String> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(json_error)?
    } else if let Ok(doc) = serde_json::from_str::<WithOutcome>(trimmed) {
        doc.outcome
    } else {
        split_names(trimmed, arg)?
    };
    inst.outcome_by_names(&names)
}

fn split_names(list: &str, location: &str) -> Result<Vec<String>> {
    let list = list.trim();
    let inner = match (list.strip_prefix('{'), list.ends_with('}')) {
        (Some(rest), true) => &rest[..rest.len() - 1],
        (None, false) => list,
        _ => return Err(Error::parse(location, format!("unbalanced braces in {list:?}"))),
    };
    Ok(inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSystemDocument {
    pub b: Rational,
    pub payments: Vec<PaymentEntry>,
}

/// `voter` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaymentEntry {
    pub voter: usize,
    pub candidate: String,
    pub amount: Rational,
}

impl PriceSystemDocument {
    pub fn from_price_system(ps: &PriceSystem, names: &[String]) -> Self {
        PriceSystemDocument {
            b: ps.b.clone(),
            payments: ps
                .payments
                .iter()
                .map(|(&(i, c), p)| PaymentEntry {
                    voter: i + 1,
                    candidate: names[c].clone(),
                    amount: p.clone(),
                })
                .collect(),
        }
    }

    /// Voter numbers are only shifted to 0-based here; range checks happen
    /// in the verifier.
    pub fn to_price_system(&self, e: &Election) -> Result<PriceSystem> {
        let mut payments = BTreeMap::new();
        for (k, entry) in self.payments.iter().enumerate() {
            if entry.voter == 0 {
                return Err(Error::Structural(format!("payments[{k}]: voter ids start at 1")));
            }
            let c = e
                .candidate_index(&entry.candidate)
                .ok_or_else(|| Error::Structural(format!("payments[{k}]: unknown candidate {:?}", entry.candidate)))?;
            if payments.insert((entry.voter - 1, c), entry.amount.clone()).is_some() {
                return Err(Error::parse(
                    format!("payments[{k}]"),
                    format!("voter {} pays for {:?} twice", entry.voter, entry.candidate),
                ));
            }
        }
        Ok(PriceSystem {
            b: self.b.clone(),
            payments,
        })
    }
}

/// Reads a price system document, or the `price_system` of a run trace.
pub fn read_price_system(path: &Path, e: &Election) -> Result<PriceSystem> {
    let mut value: serde_json::Value = serde_json::from_slice(&read_file(path)?).map_err(json_error)?;
    if let Some(inner) = value.get_mut("price_system") {
        value = inner.take();
    }
    let doc: PriceSystemDocument =
        serde_json::from_value(value).map_err(|err| Error::parse("price system", err.to_string()))?;
    doc.to_price_system(e)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VoterAmount {
    pub voter: usize,
    pub amount: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepDocument {
    pub candidate: String,
    pub level: Level,
    pub tie_set: Vec<String>,
    pub payments: Vec<VoterAmount>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundDocument {
    pub beta: Rational,
    pub group: Vec<usize>,
    pub bundle: Vec<String>,
    pub removed_voters: usize,
}

/// Result of a rule run. Steps and the price system are only filled in for
/// trace files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunDocument {
    pub rule: String,
    pub outcome: Vec<String>,
    pub total_cost: Rational,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tied_outcomes: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Rational>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<RoundDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<StepDocument>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub price_system: Option<PriceSystemDocument>,
}

pub fn step_documents(inst: &Instance, trace: &RuleTrace) -> Vec<StepDocument> {
    trace
        .steps
        .iter()
        .map(|s| StepDocument {
            candidate: inst.name(s.candidate).to_string(),
            level: s.level.clone(),
            tie_set: s.tie_set.iter().map(|&c| inst.name(c).to_string()).collect(),
            payments: s
                .payments
                .iter()
                .map(|(i, p)| VoterAmount {
                    voter: i + 1,
                    amount: p.clone(),
                })
                .collect(),
        })
        .collect()
}

pub fn round_documents(inst: &Instance, rounds: &[CohesiveRound]) -> Vec<RoundDocument> {
    rounds
        .iter()
        .map(|r| RoundDocument {
            beta: r.beta.clone(),
            group: r.group.iter().map(|i| i + 1).collect(),
            bundle: r.bundle.iter().map(|&c| inst.name(c).to_string()).collect(),
            removed_voters: r.removed_voters.len(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessDocument {
    pub voters: Vec<usize>,
    pub candidates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<BTreeMap<String, Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
}

/// Verdict with names instead of indices and 1-based voters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictDocument {
    pub axiom: String,
    pub status: Status,
    pub outcome: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<SearchBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub price_system: Option<PriceSystemDocument>,
}

impl VerdictDocument {
    pub fn new(inst: &Instance, w: &Outcome, v: &AxiomVerdict) -> Self {
        let name = |c: &CandidateId| inst.name(*c).to_string();
        VerdictDocument {
            axiom: v.axiom.name().to_string(),
            status: v.status,
            outcome: w.iter().map(name).collect(),
            witness: v.witness.as_ref().map(|wit| WitnessDocument {
                voters: wit.voters.iter().map(|i: &VoterId| i + 1).collect(),
                candidates: wit.candidates.iter().map(name).collect(),
                alpha: wit
                    .alpha
                    .as_ref()
                    .map(|a| a.iter().map(|(c, q)| (name(c), q.clone())).collect()),
                beta: wit.beta.clone(),
                ell: wit.ell,
                condition: wit.condition.clone(),
            }),
            bounds: v.bounds,
            detail: v.detail.clone(),
            price_system: None,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn minimal_document() {
        let inst = parse_instance_str(
            r#"{"format_version": 1, "candidates": [{"id": "c", "cost": "1/2"}],
                "voters": [{"id": "v", "approves": ["c"]}]}"#,
        )
        .unwrap();
        let e = inst.as_cardinal().unwrap();
        assert_eq!((e.n(), e.m()), (1, 1));
        assert_eq!(e.cost(0), &q("1/2"));
    }

    #[test]
    fn currency_budget_is_divided_out() {
        let inst = parse_instance_str(
            r#"{"format_version": 1, "budget": 90000,
                "candidates": [{"id": "a", "cost": 30000}, {"id": "b", "cost": "45000"}],
                "voters": [{"count": 2, "utilities": {"a": "1/2", "b": 1}}]}"#,
        )
        .unwrap();
        let e = inst.as_cardinal().unwrap();
        assert_eq!(e.costs(), &[q("1/3"), q("1/2")]);
        assert_eq!(e.n(), 2);
        assert_eq!(e.utility(1, 0), &q("1/2"));
    }

    #[test]
    fn round_trip() {
        let text = r#"{"format_version": 1, "budget": "3",
            "candidates": [{"id": "a", "cost": 1}, {"id": "b", "cost": 2}],
            "voters": [{"utilities": {"a": "1/3"}}, {"utilities": {"a": "1/3"}},
                       {"utilities": {"a": "1", "b": "2/7"}}, {"utilities": {"a": "1/3"}}]}"#;
        let inst = parse_instance_str(text).unwrap();
        let doc = InstanceDocument::from_instance(&inst);
        assert_eq!(doc.voters.len(), 3);
        assert_eq!(doc.voters[0].count, 2);
        assert_eq!(parse_instance_str(&serialize_instance(&inst)).unwrap(), inst);

        let ranked = parse_instance_str(
            r#"{"format_version": 1, "committee_size": 2, "candidates": [{"id": "x"}, {"id": "y"}, {"id": "z"}],
                "voters": [{"ranking": ["y", "x", "z"]}, {"count": 3, "ranking": ["z", "y", "x"]}]}"#,
        )
        .unwrap();
        assert_eq!(ranked.n(), 4);
        assert_eq!(parse_instance_str(&serialize_instance(&ranked)).unwrap(), ranked);
    }

    fn parse_error_location(text: &str) -> String {
        match parse_instance_str(text) {
            Err(Error::Parse { location, .. }) => location,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn mixed_ballots_rejected() {
        let loc = parse_error_location(
            r#"{"format_version": 1, "committee_size": 1, "candidates": [{"id": "a", "cost": 1}],
                "voters": [{"approves": ["a"]}, {"ranking": ["a"]}]}"#,
        );
        assert_eq!(loc, "voters[1].ranking");
    }

    #[test]
    fn diagnostics_name_the_field() {
        assert_eq!(
            parse_error_location(
                r#"{"format_version": 1, "candidates": [{"id": "a", "cost": 1}, {"id": "b", "cost": 1}],
                    "voters": [{"approves": ["a"]}]}"#
            ),
            "candidates[1]"
        );
        assert_eq!(
            parse_error_location(
                r#"{"format_version": 1, "candidates": [{"id": "a", "cost": 1}],
                    "voters": [{"approves": ["a", "zz"]}]}"#
            ),
            "voters[0].approves[1]"
        );
        let loc = parse_error_location(
            "{\"format_version\": 1,\n \"candidates\": [{\"id\": \"a\", \"cost\": 0.5}],\n \"voters\": []}",
        );
        assert!(loc.starts_with("line 2"), "{loc}");
        assert!(parse_error_location("{not json").starts_with("line 1"));
        assert_eq!(
            parse_error_location(r#"{"format_version": 1, "candidates": [{"id": "a", "cost": 2}], "voters": [{"approves": ["a"]}]}"#),
            "candidates[0].cost"
        );
    }

    #[test]
    fn outcome_arguments() {
        let inst = parse_instance_str(
            r#"{"format_version": 1, "candidates": [{"id": "A", "cost": "1/2"}, {"id": "B", "cost": "1/2"}],
                "voters": [{"approves": ["A", "B"]}]}"#,
        )
        .unwrap();
        assert_eq!(parse_outcome_arg("outcome:{A, B}", &inst).unwrap().to_vec(), vec![0, 1]);
        assert_eq!(parse_outcome_arg("outcome:B", &inst).unwrap().to_vec(), vec![1]);
        assert!(parse_outcome_arg("outcome:{}", &inst).unwrap().is_empty());
        assert!(parse_outcome_arg("outcome:{C}", &inst).is_err());
        assert!(parse_outcome_arg("outcome:{A", &inst).is_err());

        let dir = std::env::temp_dir().join(format!("pb-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for (file, body) in [
            ("a.json", "[\"A\"]"),
            ("b.json", "{\"rule\": \"x\", \"outcome\": [\"A\"]}"),
            ("c.txt", "{A}\n"),
        ] {
            let path = dir.join(file);
            std::fs::write(&path, body).unwrap();
            assert_eq!(parse_outcome_arg(path.to_str().unwrap(), &inst).unwrap().to_vec(), vec![0]);
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn price_system_documents() {
        let e = Election::from_approvals(vec![("A".into(), q("1/2"))], vec![vec![0], vec![0]]).unwrap();
        let ps = PriceSystem {
            b: q("1"),
            payments: [((0, 0), q("1/4")), ((1, 0), q("1/4"))].into_iter().collect(),
        };
        let doc = PriceSystemDocument::from_price_system(&ps, e.names());
        assert_eq!(doc.payments[1].voter, 2);
        let text = to_json(&doc);
        assert!(text.contains("\"1/4\""));
        let back: PriceSystemDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_price_system(&e).unwrap(), ps);
    }
}
