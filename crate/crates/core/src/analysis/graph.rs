use std::collections::VecDeque;

use crate::chain::{MarkovChain, StateId, StateSet};
use crate::error::Result;
use crate::scalar::Scalar;

use super::UntilQuery;

/// States reachable from `s` along positive-probability edges using at least
/// one transition, with every intermediate state in `phi`. Neither `s` nor
/// the reached state needs to be in `phi`; `s` itself is only included when
/// it lies on such a cycle.
pub fn reachable<S: Scalar>(chain: &MarkovChain<S>, phi: &StateSet, s: StateId) -> Result<StateSet> {
    chain.check(s)?;
    chain.check_set(phi)?;
    let mut found = StateSet::new();
    let mut queue: VecDeque<StateId> = VecDeque::from([s]);
    let mut expanded = vec![false; chain.len()];
    while let Some(u) = queue.pop_front() {
        if std::mem::replace(&mut expanded[u.0], true) {
            continue;
        }
        for &(t, _) in chain.row(u) {
            found.insert(t);
            if phi.contains(&t) && !expanded[t.0] {
                queue.push_back(t);
            }
        }
    }
    Ok(found)
}

/// Whether `start·ω ∈ until Φ Ψ` has probability zero.
pub fn until_prob_is_zero<S: Scalar>(chain: &MarkovChain<S>, query: &UntilQuery) -> Result<bool> {
    query.check(chain)?;
    let UntilQuery { phi, psi, start } = query;
    if psi.contains(start) {
        return Ok(false);
    }
    // The prepended start is index 0 of the path, so it must itself be in Φ.
    if !phi.contains(start) {
        return Ok(true);
    }
    let reach = reachable(chain, &difference(phi, psi), *start)?;
    Ok(reach.is_disjoint(psi))
}

/// Graph certificate that `start·ω ∈ until Φ Ψ` holds almost surely.
///
/// Requires `start ∈ Φ`, that every state reachable through `Φ ∖ Ψ` lies in
/// `Φ ∪ Ψ`, and that each such state outside `Ψ` (and `start`, if outside
/// `Ψ`) can itself reach `Ψ` through `Φ ∖ Ψ`. Returning `false` means "not
/// certified", not "fails with positive probability".
pub fn certify_ae_until<S: Scalar>(chain: &MarkovChain<S>, query: &UntilQuery) -> Result<bool> {
    query.check(chain)?;
    let UntilQuery { phi, psi, start } = query;
    if !phi.contains(start) {
        return Ok(false);
    }
    let inner = difference(phi, psi);
    let reach = reachable(chain, &inner, *start)?;
    if !reach.iter().all(|t| phi.contains(t) || psi.contains(t)) {
        return Ok(false);
    }
    for t in reach.iter().chain(std::iter::once(start)) {
        if psi.contains(t) {
            continue;
        }
        if reachable(chain, &inner, *t)?.is_disjoint(psi) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn difference(a: &StateSet, b: &StateSet) -> StateSet {
    a.difference(b).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Entry;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    // a -> b (1/2), a -> c (1/2), b -> b, c -> a
    fn small() -> MarkovChain<Rational> {
        MarkovChain::validate(
            ["a", "b", "c"],
            vec![
                Entry::new("a", "b", r(1, 2)),
                Entry::new("a", "c", r(1, 2)),
                Entry::new("b", "b", r(1, 1)),
                Entry::new("c", "a", r(1, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_phi_gives_successors() {
        let c = small();
        for s in c.states() {
            assert_eq!(reachable(&c, &StateSet::new(), s).unwrap(), c.successors(s).unwrap());
        }
    }

    #[test]
    fn start_only_reachable_via_cycle() {
        let c = small();
        let a = c.state("a").unwrap();
        let only_b = c.state_set(["b"]).unwrap();
        assert!(!reachable(&c, &only_b, a).unwrap().contains(&a));
        let with_c = c.state_set(["c"]).unwrap();
        assert!(reachable(&c, &with_c, a).unwrap().contains(&a));
    }

    #[test]
    fn zero_criterion_guards() {
        let c = small();
        let all = c.all_states();
        let (a, b) = (c.state("a").unwrap(), c.state("b").unwrap());
        let q = UntilQuery::new(all.clone(), StateSet::from([a]), a);
        assert!(!until_prob_is_zero(&c, &q).unwrap());
        let q = UntilQuery::new(all, StateSet::from([a]), b);
        assert!(until_prob_is_zero(&c, &q).unwrap());
        // start outside Φ ∪ Ψ fails at index 0 even though Ψ is one step away
        let q = UntilQuery::new(StateSet::new(), StateSet::from([b]), a);
        assert!(until_prob_is_zero(&c, &q).unwrap());
    }

    #[test]
    fn absorbing_non_target_blocks_certification() {
        let c = small();
        let a = c.state("a").unwrap();
        let q = UntilQuery::new(c.all_states(), c.state_set(["c"]).unwrap(), a);
        assert!(!certify_ae_until(&c, &q).unwrap());
        let q = UntilQuery::new(c.all_states(), c.state_set(["b"]).unwrap(), a);
        assert!(certify_ae_until(&c, &q).unwrap());
    }
}
