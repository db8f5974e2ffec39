//! Baseline approval rules: exact PAV and continuous Phragmén.

use crate::equal_shares::{Level, RuleTrace, TieBreak, TraceStep};
use crate::error::{Error, Result};
use crate::model::{CandidateId, Election, Outcome};
use crate::rational::Rational;

/// Default cap on the number of candidates for [`run_pav`].
pub const MAX_PAV_CANDIDATES: usize = 24;

fn require_approval(e: &Election, rule: &str) -> Result<()> {
    if e.is_approval() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{rule} needs 0/1 utilities")))
    }
}

/// `H(r) = 1 + 1/2 + ... + 1/r`.
pub fn harmonic(r: usize) -> Rational {
    (1..=r).map(|j| Rational::new(1, j as i64)).sum()
}

/// `sum_i H(|A(i) ∩ W|)`.
pub fn pav_score(w: &Outcome, e: &Election) -> Result<Rational> {
    require_approval(e, "PAV")?;
    Ok((0..e.n())
        .map(|i| harmonic(e.approval_set(i).iter().filter(|c| w.contains(**c)).count()))
        .sum())
}

/// Every feasible outcome with maximal PAV score.
pub fn run_pav(e: &Election) -> Result<Vec<Outcome>> {
    run_pav_with(e, MAX_PAV_CANDIDATES)
}

/// Branch and bound over include/exclude decisions in index order. The bound
/// adds a fractional knapsack over the remaining candidates, each valued at
/// its current marginal gain `sum_{i supports c} 1/(count_i + 1)`, which can
/// only shrink as more candidates are added.
pub fn run_pav_with(e: &Election, max_candidates: usize) -> Result<Vec<Outcome>> {
    require_approval(e, "PAV")?;
    if e.m() > max_candidates {
        return Err(Error::Refused {
            what: "candidates for exact PAV".into(),
            actual: e.m(),
            bound: max_candidates,
        });
    }
    let mut search = PavSearch {
        e,
        counts: vec![0; e.n()],
        chosen: Vec::new(),
        best: None,
        winners: Vec::new(),
    };
    search.go(0, Rational::zero(), Rational::one());
    let mut winners: Vec<Outcome> = search
        .winners
        .into_iter()
        .map(|w| Outcome::new(e, w))
        .collect::<Result<_>>()?;
    winners.sort();
    Ok(winners)
}

struct PavSearch<'a> {
    e: &'a Election,
    counts: Vec<usize>,
    chosen: Vec<CandidateId>,
    best: Option<Rational>,
    winners: Vec<Vec<CandidateId>>,
}

impl PavSearch<'_> {
    fn gain(&self, c: CandidateId) -> Rational {
        self.e
            .supporters(c)
            .iter()
            .map(|&i| Rational::new(1, self.counts[i] as i64 + 1))
            .sum()
    }

    fn bound(&self, from: usize, room: &Rational) -> Rational {
        let mut items: Vec<(Rational, CandidateId)> = (from..self.e.m())
            .filter(|&c| self.e.cost(c) <= room)
            .map(|c| (self.gain(c), c))
            .collect();
        items.sort_by(|a, b| {
            (&b.0 / self.e.cost(b.1))
                .cmp(&(&a.0 / self.e.cost(a.1)))
                .then(a.1.cmp(&b.1))
        });
        let mut room = room.clone();
        let mut total = Rational::zero();
        for (g, c) in items {
            let cost = self.e.cost(c);
            if *cost <= room {
                total += g;
                room -= cost;
            } else {
                total += g * &room / cost;
                break;
            }
        }
        total
    }

    fn go(&mut self, next: usize, score: Rational, room: Rational) {
        if let Some(best) = &self.best {
            if &score + self.bound(next, &room) < *best {
                return;
            }
        }
        if next == self.e.m() {
            match &self.best {
                Some(best) if score < *best => {}
                Some(best) if score == *best => self.winners.push(self.chosen.clone()),
                _ => {
                    self.best = Some(score);
                    self.winners = vec![self.chosen.clone()];
                }
            }
            return;
        }
        let c = next;
        if self.e.cost(c) <= &room {
            let gain = self.gain(c);
            for &i in self.e.supporters(c) {
                self.counts[i] += 1;
            }
            self.chosen.push(c);
            self.go(next + 1, &score + gain, &room - self.e.cost(c));
            self.chosen.pop();
            for &i in self.e.supporters(c) {
                self.counts[i] -= 1;
            }
        }
        self.go(next + 1, score, room);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhragmenOptions {
    pub tie: TieBreak,
    /// Drop a candidate that would overshoot the budget and keep going,
    /// instead of stopping.
    pub skip: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhragmenOutput {
    pub outcome: Outcome,
    pub trace: RuleTrace,
}

/// Continuous Phragmén. Every voter earns `1/n` per unit of time; a
/// candidate is bought the moment its supporters together hold its cost, and
/// their accounts are emptied. The process stops at the first candidate that
/// would overshoot the budget (or skips it, with `skip`).
pub fn run_phragmen(e: &Election, options: PhragmenOptions) -> Result<PhragmenOutput> {
    require_approval(e, "Phragmén")?;
    let n = Rational::from(e.n());
    let mut balance = vec![Rational::zero(); e.n()];
    let mut now = Rational::zero();
    let mut open: Vec<bool> = vec![true; e.m()];
    let mut spent = Rational::zero();
    let mut elected = Vec::new();
    let mut trace = RuleTrace::default();

    loop {
        let mut earliest: Option<Rational> = None;
        let mut tied = Vec::new();
        for c in (0..e.m()).filter(|&c| open[c]) {
            let supporters = e.supporters(c);
            let held: Rational = supporters.iter().map(|&i| &balance[i]).sum();
            let missing = (e.cost(c) - held).max(Rational::zero());
            let at = &now + missing * &n / Rational::from(supporters.len());
            match &earliest {
                Some(t) if at > *t => {}
                Some(t) if at == *t => tied.push(c),
                _ => {
                    earliest = Some(at);
                    tied = vec![c];
                }
            }
        }
        let Some(at) = earliest else {
            break;
        };
        let c = options.tie.pick(e, &tied);
        if &spent + e.cost(c) > Rational::one() {
            if options.skip {
                open[c] = false;
                continue;
            }
            break;
        }
        let accrued = (&at - &now) / &n;
        for b in balance.iter_mut() {
            *b += &accrued;
        }
        now = at;
        let payments = e
            .supporters(c)
            .iter()
            .map(|&i| (i, std::mem::take(&mut balance[i])))
            .collect();
        open[c] = false;
        spent += e.cost(c);
        elected.push(c);
        trace.steps.push(TraceStep {
            candidate: c,
            level: Level::Time(now.clone()),
            payments,
            tie_set: tied,
        });
    }
    Ok(PhragmenOutput {
        outcome: Outcome::new(e, elected)?,
        trace,
    })
}
