use crate::chain::{MarkovChain, RewardChain, StateId, StateSet};
use crate::error::{Error, Result};
use crate::scalar::{ExtScalar, Scalar};

use super::graph::until_prob_is_zero;
use super::UntilQuery;

/// Solves `(I − Q) X = B` where `Q` is `τ` restricted to `unknowns` and row
/// `i` of `B` is `rhs(unknowns[i])`. Returns one row per unknown.
pub(crate) fn solve_restricted<S, F>(
    chain: &MarkovChain<S>,
    unknowns: &[StateId],
    mut rhs: F,
) -> Result<Vec<Vec<S>>>
where
    S: Scalar,
    F: FnMut(StateId) -> Vec<S>,
{
    let position = positions(chain.len(), unknowns);
    let n = unknowns.len();
    let mut a = vec![vec![S::zero(); n]; n];
    for (i, &s) in unknowns.iter().enumerate() {
        a[i][i] = S::one();
        for (t, p) in chain.row(s) {
            if let Some(j) = position[t.0] {
                a[i][j] = a[i][j].clone() - p.clone();
            }
        }
    }
    let b: Vec<Vec<S>> = unknowns.iter().map(|&s| rhs(s)).collect();
    S::solve(a, b)
}

pub(crate) fn positions(len: usize, unknowns: &[StateId]) -> Vec<Option<usize>> {
    let mut position = vec![None; len];
    for (i, s) in unknowns.iter().enumerate() {
        position[s.0] = Some(i);
    }
    position
}

/// `Pr_s(s·ω ∈ until Φ Ψ)` for every state `s`, indexed by state.
pub fn until_probabilities<S: Scalar>(
    chain: &MarkovChain<S>,
    phi: &StateSet,
    psi: &StateSet,
) -> Result<Vec<S>> {
    chain.check_set(phi)?;
    chain.check_set(psi)?;
    let mut x = vec![S::zero(); chain.len()];
    let mut unknowns = Vec::new();
    for s in chain.states() {
        if psi.contains(&s) {
            x[s.0] = S::one();
        } else if phi.contains(&s) {
            let query = UntilQuery::new(phi.clone(), psi.clone(), s);
            if !until_prob_is_zero(chain, &query)? {
                unknowns.push(s);
            }
        }
    }
    let solved = solve_restricted(chain, &unknowns, |s| {
        let into_psi = chain
            .row(s)
            .iter()
            .filter(|(t, _)| psi.contains(t))
            .fold(S::zero(), |acc, (_, p)| acc + p.clone());
        vec![into_psi]
    })?;
    for (s, row) in unknowns.iter().zip(solved) {
        x[s.0] = row.into_iter().next().expect("one column");
    }
    Ok(x)
}

/// `Pr_start(start·ω ∈ until Φ Ψ)`.
pub fn until_probability<S: Scalar>(chain: &MarkovChain<S>, query: &UntilQuery) -> Result<S> {
    query.check(chain)?;
    let x = until_probabilities(chain, &query.phi, &query.psi)?;
    Ok(x[query.start.0].clone())
}

/// States outside `target` from which `target` is reached almost surely,
/// judged by the solved reach probability.
fn almost_sure_region<S: Scalar>(chain: &MarkovChain<S>, target: &StateSet) -> Result<Vec<bool>> {
    let reach = until_probabilities(chain, &chain.all_states(), target)?;
    Ok(chain
        .states()
        .map(|s| !target.contains(&s) && reach[s.0].approx_eq(&S::one()))
        .collect())
}

/// Expected value of a per-transition charge accumulated until `target` is
/// first visited, or infinity when `target` is missed with positive
/// probability.
fn expected_accumulation<S, F>(
    chain: &MarkovChain<S>,
    target: &StateSet,
    start: StateId,
    mut charge: F,
) -> Result<ExtScalar<S>>
where
    S: Scalar,
    F: FnMut(StateId) -> S,
{
    chain.check(start)?;
    chain.check_set(target)?;
    if target.contains(&start) {
        return Ok(ExtScalar::Finite(S::zero()));
    }
    let region = almost_sure_region(chain, target)?;
    if !region[start.0] {
        return Ok(ExtScalar::Infinity);
    }
    // Successors of an almost-sure state outside the target are themselves
    // almost-sure or in the target, so the restricted system is closed.
    let unknowns: Vec<StateId> = chain.states().filter(|s| region[s.0]).collect();
    let solved = solve_restricted(chain, &unknowns, |s| vec![charge(s)])?;
    let at = unknowns.iter().position(|&s| s == start).ok_or(Error::SingularSystem)?;
    Ok(ExtScalar::Finite(solved[at][0].clone()))
}

/// Expected hitting time of `phi` on `start·ω` (zero when `start ∈ phi`).
pub fn expected_hitting_time<S: Scalar>(
    chain: &MarkovChain<S>,
    phi: &StateSet,
    start: StateId,
) -> Result<ExtScalar<S>> {
    expected_accumulation(chain, phi, start, |_| S::one())
}

/// Expected transition cost accumulated on `start·ω` before `phi` is first
/// visited; the transition out of `start` is charged.
pub fn expected_cost_until<S: Scalar>(
    rchain: &RewardChain<S>,
    phi: &StateSet,
    start: StateId,
) -> Result<ExtScalar<S>> {
    let chain = rchain.chain();
    expected_accumulation(chain, phi, start, |s| {
        chain
            .row(s)
            .iter()
            .fold(S::zero(), |acc, (t, p)| acc + p.clone() * rchain.cost(s, *t))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Entry;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn deterministic_single_step() {
        let c = MarkovChain::validate(
            ["a", "b"],
            vec![Entry::new("a", "b", r(1, 1)), Entry::new("b", "b", r(1, 1))],
        )
        .unwrap();
        let (a, b) = (c.state("a").unwrap(), c.state("b").unwrap());
        let target = StateSet::from([b]);
        assert_eq!(expected_hitting_time(&c, &target, a).unwrap(), ExtScalar::Finite(r(1, 1)));
        assert_eq!(expected_hitting_time(&c, &target, b).unwrap(), ExtScalar::Finite(r(0, 1)));
    }

    #[test]
    fn geometric_self_loop() {
        // h = 1 + (3/4) h  =>  h = 4
        let c = MarkovChain::validate(
            ["t", "done"],
            vec![
                Entry::new("t", "t", r(3, 4)),
                Entry::new("t", "done", r(1, 4)),
                Entry::new("done", "done", r(1, 1)),
            ],
        )
        .unwrap();
        let t = c.state("t").unwrap();
        let target = c.state_set(["done"]).unwrap();
        assert_eq!(expected_hitting_time(&c, &target, t).unwrap(), ExtScalar::Finite(r(4, 1)));
        let fc = c.to_float();
        let h = expected_hitting_time(&fc, &target, t).unwrap();
        assert!((h.to_f64() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn missing_target_with_positive_probability_is_infinite() {
        let c = MarkovChain::validate(
            ["a", "good", "trap"],
            vec![
                Entry::new("a", "good", r(1, 2)),
                Entry::new("a", "trap", r(1, 2)),
                Entry::new("good", "good", r(1, 1)),
                Entry::new("trap", "trap", r(1, 1)),
            ],
        )
        .unwrap();
        let a = c.state("a").unwrap();
        let target = c.state_set(["good"]).unwrap();
        assert_eq!(expected_hitting_time(&c, &target, a).unwrap(), ExtScalar::Infinity);
        let rc = RewardChain::validate(c, Vec::new()).unwrap();
        assert_eq!(expected_cost_until(&rc, &target, a).unwrap(), ExtScalar::Infinity);
    }

    #[test]
    fn zero_costs_give_zero_expectation() {
        let c = MarkovChain::validate(
            ["a", "b"],
            vec![
                Entry::new("a", "a", r(1, 3)),
                Entry::new("a", "b", r(2, 3)),
                Entry::new("b", "b", r(1, 1)),
            ],
        )
        .unwrap();
        let a = c.state("a").unwrap();
        let target = c.state_set(["b"]).unwrap();
        let rc = RewardChain::validate(c, Vec::new()).unwrap();
        assert_eq!(expected_cost_until(&rc, &target, a).unwrap(), ExtScalar::Finite(r(0, 1)));
    }
}
