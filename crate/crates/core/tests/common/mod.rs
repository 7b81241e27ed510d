#![allow(dead_code)]

use chainproof::analysis::UntilQuery;
use chainproof::{Entry, MarkovChain, Rational, StateId, StateSet};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Random row-stochastic rational chain with at most `max_states` states and
/// out-degree 1 to 3, weights small integers normalised per row.
pub fn random_chain(rng: &mut Xoshiro256StarStar, max_states: usize) -> MarkovChain<Rational> {
    let n = rng.random_range(1..=max_states);
    let labels: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut entries = Vec::new();
    for s in 0..n {
        let degree = rng.random_range(1..=n.min(3));
        let mut targets: Vec<usize> = (0..n).collect();
        for i in 0..degree {
            let j = rng.random_range(i..n);
            targets.swap(i, j);
        }
        let weights: Vec<i64> = (0..degree).map(|_| rng.random_range(1..=4)).collect();
        let total: i64 = weights.iter().sum();
        for (t, w) in targets[..degree].iter().zip(&weights) {
            entries.push(Entry::new(&labels[s], &labels[*t], r(*w, total)));
        }
    }
    MarkovChain::validate(labels.iter().cloned(), entries).expect("generated chain is valid")
}

pub fn random_subset(rng: &mut Xoshiro256StarStar, n: usize, p: f64) -> StateSet {
    (0..n).filter(|_| rng.random_bool(p)).map(StateId).collect()
}

pub fn rng(seed: u64) -> Xoshiro256StarStar {
    Xoshiro256StarStar::seed_from_u64(seed)
}

/// States with a finite path through `phi` into `psi`, by naive fixpoint
/// iteration over all edges.
pub fn can_reach_fixpoint(chain: &MarkovChain<Rational>, phi: &StateSet, psi: &StateSet) -> Vec<bool> {
    let mut good: Vec<bool> = chain.states().map(|s| psi.contains(&s)).collect();
    loop {
        let mut changed = false;
        for s in chain.states() {
            if !good[s.0] && phi.contains(&s) && chain.row(s).iter().any(|(t, _)| good[t.0]) {
                good[s.0] = true;
                changed = true;
            }
        }
        if !changed {
            return good;
        }
    }
}

/// Exhaustive enumeration of prefixes of `start·ω` up to `max_len`
/// transitions. Returns `(accepted, undecided)` mass: `accepted` sums the
/// cylinders whose last state is the first to decide `until Φ Ψ` positively;
/// `undecided` sums the cylinders still undecided at the length cap.
/// Prefixes entering a state that cannot reach `Ψ` through `Φ` are decided
/// negatively.
pub fn enumerate_until(
    chain: &MarkovChain<Rational>,
    query: &UntilQuery,
    max_len: usize,
) -> (Rational, Rational) {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        chain: &MarkovChain<Rational>,
        q: &UntilQuery,
        good: &[bool],
        s: StateId,
        prob: Rational,
        depth: usize,
        max_len: usize,
        acc: &mut (Rational, Rational),
    ) {
        if q.psi.contains(&s) {
            acc.0 += prob;
            return;
        }
        if !good[s.0] {
            return;
        }
        if depth == max_len {
            acc.1 += prob;
            return;
        }
        for (t, p) in chain.row(s) {
            walk(chain, q, good, *t, &prob * p, depth + 1, max_len, acc);
        }
    }
    let good = can_reach_fixpoint(chain, &query.phi, &query.psi);
    let mut acc = (r(0, 1), r(0, 1));
    walk(chain, query, &good, query.start, r(1, 1), 0, max_len, &mut acc);
    acc
}

/// `{1/10, 3/10, …, 9/10}`.
pub fn odd_tenths() -> Vec<Rational> {
    (0..5).map(|k| r(2 * k + 1, 10)).collect()
}
