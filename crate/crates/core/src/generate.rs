//! Seeded random instances for property tests and benchmarks.
//!
//! Costs and utilities use small denominators so exact arithmetic stays
//! cheap. Every candidate gets at least one supporter.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CandidateId, Election};
use crate::ordinal::RankedElection;
use crate::rational::Rational;

/// A reproducible generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn names(m: usize) -> Vec<String> {
    (1..=m).map(|j| format!("c{j}")).collect()
}

/// Cost `p/q` with `q` in 2..=12 and `1 <= p <= q`.
fn random_cost(rng: &mut impl Rng) -> Rational {
    let q: i64 = rng.random_range(2..=12);
    let p: i64 = rng.random_range(1..=q);
    Rational::new(p, q)
}

/// Each voter approves each candidate with probability `density`; costs are
/// random.
pub fn approval_election(rng: &mut impl Rng, n: usize, m: usize, density: f64) -> Election {
    let costs = (0..m).map(|_| random_cost(rng)).collect();
    approval_with_costs(rng, n, costs, density)
}

/// Unit-cost approval election: every candidate costs `1/k`.
pub fn unit_cost_election(rng: &mut impl Rng, n: usize, m: usize, k: usize, density: f64) -> Election {
    approval_with_costs(rng, n, vec![Rational::new(1, k as i64); m], density)
}

fn approval_with_costs(rng: &mut impl Rng, n: usize, costs: Vec<Rational>, density: f64) -> Election {
    assert!(n > 0, "need at least one voter");
    let m = costs.len();
    let mut approvals: Vec<Vec<CandidateId>> = vec![Vec::new(); n];
    for c in 0..m {
        let mut any = false;
        for set in approvals.iter_mut() {
            if rng.random_bool(density) {
                set.push(c);
                any = true;
            }
        }
        if !any {
            approvals[rng.random_range(0..n)].push(c);
        }
    }
    for set in approvals.iter_mut() {
        set.sort_unstable();
    }
    let candidates = names(m).into_iter().zip(costs).collect();
    Election::from_approvals(candidates, approvals).expect("generated election is valid")
}

fn level(rng: &mut impl Rng) -> Rational {
    Rational::new(rng.random_range(1..=4i64), 4)
}

/// Each utility is 0 with probability `1 - density`, otherwise `j/4` for a
/// uniform `j` in 1..=4.
pub fn cardinal_election(rng: &mut impl Rng, n: usize, m: usize, density: f64) -> Election {
    assert!(n > 0, "need at least one voter");
    let mut rows: Vec<Vec<(CandidateId, Rational)>> = vec![Vec::new(); n];
    for c in 0..m {
        let mut any = false;
        for row in rows.iter_mut() {
            if rng.random_bool(density) {
                row.push((c, level(rng)));
                any = true;
            }
        }
        if !any {
            let i = rng.random_range(0..n);
            rows[i].push((c, level(rng)));
        }
    }
    let candidates = names(m).into_iter().zip((0..m).map(|_| random_cost(rng))).collect();
    Election::new(candidates, rows).expect("generated election is valid")
}

/// Uniformly random complete rankings.
pub fn ranked_election(rng: &mut impl Rng, n: usize, m: usize, k: usize) -> RankedElection {
    let rankings = (0..n)
        .map(|_| {
            let mut r: Vec<CandidateId> = (0..m).collect();
            r.shuffle(rng);
            r
        })
        .collect();
    RankedElection::new(names(m), k, rankings).expect("generated election is valid")
}

/// Rankings where voters copy one of a few base orders, so solid
/// coalitions are common.
pub fn clustered_ranked_election(rng: &mut impl Rng, n: usize, m: usize, k: usize, clusters: usize) -> RankedElection {
    let bases: Vec<Vec<CandidateId>> = (0..clusters.max(1))
        .map(|_| {
            let mut r: Vec<CandidateId> = (0..m).collect();
            r.shuffle(rng);
            r
        })
        .collect();
    let rankings = (0..n)
        .map(|_| {
            let mut r = bases[rng.random_range(0..bases.len())].clone();
            // An occasional swap of adjacent positions keeps profiles varied.
            if m > 1 && rng.random_bool(0.3) {
                let p = rng.random_range(0..m - 1);
                r.swap(p, p + 1);
            }
            r
        })
        .collect();
    RankedElection::new(names(m), k, rankings).expect("generated election is valid")
}
