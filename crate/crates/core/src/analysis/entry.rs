use std::collections::BTreeMap;

use crate::chain::{MarkovChain, StateId, StateSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::graph::until_prob_is_zero;
use super::solve::{positions, solve_restricted};
use super::UntilQuery;

/// Law over states plus the mass of paths that never produce a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S> {
    pub mass: BTreeMap<StateId, S>,
    pub never: S,
}

/// Law over `(predecessor, entry state)` pairs at the first entry into a
/// target set.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistribution<S> {
    pub mass: BTreeMap<(StateId, StateId), S>,
    pub never: S,
}

impl<S: Scalar> Distribution<S> {
    pub fn get(&self, s: StateId) -> S {
        self.mass.get(&s).cloned().unwrap_or_else(S::zero)
    }

    pub fn total(&self) -> S {
        self.mass.values().fold(S::zero(), |acc, v| acc + v.clone())
    }
}

impl<S: Scalar> EdgeDistribution<S> {
    pub fn total(&self) -> S {
        self.mass.values().fold(S::zero(), |acc, v| acc + v.clone())
    }

    /// Sums out the predecessor.
    pub fn entry_marginal(&self) -> Distribution<S> {
        let mut mass: BTreeMap<StateId, S> = BTreeMap::new();
        for (&(_, c), v) in &self.mass {
            let slot = mass.entry(c).or_insert_with(S::zero);
            *slot = slot.clone() + v.clone();
        }
        Distribution { mass, never: self.never.clone() }
    }

    /// Sums out the entry state.
    pub fn predecessor_marginal(&self) -> BTreeMap<StateId, S> {
        let mut mass: BTreeMap<StateId, S> = BTreeMap::new();
        for (&(u, _), v) in &self.mass {
            let slot = mass.entry(u).or_insert_with(S::zero);
            *slot = slot.clone() + v.clone();
        }
        mass
    }
}

/// Residual `1 − total`, clamped at zero against float rounding.
fn residual<S: Scalar>(total: S) -> S {
    let never = S::one() - total;
    if never.is_negative_value() {
        S::zero()
    } else {
        never
    }
}

/// States outside `target` that reach it with positive probability.
fn can_reach<S: Scalar>(chain: &MarkovChain<S>, target: &StateSet) -> Result<Vec<StateId>> {
    let all = chain.all_states();
    let mut out = Vec::new();
    for s in chain.states() {
        if target.contains(&s) {
            continue;
        }
        if !until_prob_is_zero(chain, &UntilQuery::new(all.clone(), target.clone(), s))? {
            out.push(s);
        }
    }
    Ok(out)
}

/// Law of the first state of `target` visited by `start·ω`.
pub fn first_entry_distribution<S: Scalar>(
    chain: &MarkovChain<S>,
    target: &StateSet,
    start: StateId,
) -> Result<Distribution<S>> {
    chain.check(start)?;
    chain.check_set(target)?;
    if target.contains(&start) {
        return Ok(Distribution { mass: BTreeMap::from([(start, S::one())]), never: S::zero() });
    }
    let unknowns = can_reach(chain, target)?;
    let Some(at) = unknowns.iter().position(|&s| s == start) else {
        return Ok(Distribution { mass: BTreeMap::new(), never: S::one() });
    };
    let columns: Vec<StateId> = target.iter().copied().collect();
    // f_s(c) = τ s c + Σ_{t ∉ target} τ s t · f_t(c), one column per c.
    let solved = solve_restricted(chain, &unknowns, |s| {
        columns.iter().map(|&c| chain.prob(s, c)).collect()
    })?;
    let mass: BTreeMap<StateId, S> = columns
        .into_iter()
        .zip(solved[at].iter().cloned())
        .filter(|(_, v)| !v.is_zero())
        .collect();
    let never = residual(mass.values().fold(S::zero(), |acc, v| acc + v.clone()));
    Ok(Distribution { mass, never })
}

/// Law of the edge `(u, c)` through which `start·ω` first enters `target`.
///
/// The mass of `(u, c)` is the expected number of visits to `u` before entry
/// times `τ u c`. Visit counts from `start` form row `start` of
/// `(I − Q)⁻¹`, obtained from the transposed system with a single right-hand
/// side.
pub fn entry_edge_distribution<S: Scalar>(
    chain: &MarkovChain<S>,
    target: &StateSet,
    start: StateId,
) -> Result<EdgeDistribution<S>> {
    chain.check(start)?;
    chain.check_set(target)?;
    if target.contains(&start) {
        return Err(Error::StartInTarget(chain.label(start).to_string()));
    }
    let unknowns = can_reach(chain, target)?;
    if !unknowns.contains(&start) {
        return Ok(EdgeDistribution { mass: BTreeMap::new(), never: S::one() });
    }
    let position = positions(chain.len(), &unknowns);
    let n = unknowns.len();
    let mut a = vec![vec![S::zero(); n]; n];
    for (i, &s) in unknowns.iter().enumerate() {
        a[i][i] = S::one();
        for (t, p) in chain.row(s) {
            if let Some(j) = position[t.0] {
                // transposed: entry (j, i) of I − Q
                a[j][i] = a[j][i].clone() - p.clone();
            }
        }
    }
    let b: Vec<Vec<S>> = unknowns
        .iter()
        .map(|&s| vec![if s == start { S::one() } else { S::zero() }])
        .collect();
    let visits = S::solve(a, b)?;

    let mut mass = BTreeMap::new();
    for (i, &u) in unknowns.iter().enumerate() {
        let v = &visits[i][0];
        if v.is_zero() {
            continue;
        }
        for (c, p) in chain.row(u) {
            if target.contains(c) {
                mass.insert((u, *c), v.clone() * p.clone());
            }
        }
    }
    let never = residual(mass.values().fold(S::zero(), |acc, v: &S| acc + v.clone()));
    Ok(EdgeDistribution { mass, never })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Entry;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn line() -> MarkovChain<Rational> {
        MarkovChain::validate(
            ["a", "b", "c"],
            vec![
                Entry::new("a", "b", r(1, 1)),
                Entry::new("b", "c", r(1, 1)),
                Entry::new("c", "c", r(1, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_first_entry() {
        let c = line();
        let (a, cc) = (c.state("a").unwrap(), c.state("c").unwrap());
        let d = first_entry_distribution(&c, &StateSet::from([cc]), a).unwrap();
        assert_eq!(d.mass, BTreeMap::from([(cc, r(1, 1))]));
        assert_eq!(d.never, r(0, 1));
    }

    #[test]
    fn unreachable_target_is_never() {
        let c = line();
        let (a, cc) = (c.state("a").unwrap(), c.state("c").unwrap());
        let d = first_entry_distribution(&c, &StateSet::from([a]), cc).unwrap();
        assert!(d.mass.is_empty());
        assert_eq!(d.never, r(1, 1));
        let e = entry_edge_distribution(&c, &StateSet::from([a]), cc).unwrap();
        assert!(e.mass.is_empty());
        assert_eq!(e.never, r(1, 1));
    }

    #[test]
    fn single_edge_entry() {
        let c = MarkovChain::validate(
            ["a", "b"],
            vec![Entry::new("a", "b", r(1, 1)), Entry::new("b", "b", r(1, 1))],
        )
        .unwrap();
        let (a, b) = (c.state("a").unwrap(), c.state("b").unwrap());
        let e = entry_edge_distribution(&c, &StateSet::from([b]), a).unwrap();
        assert_eq!(e.mass, BTreeMap::from([((a, b), r(1, 1))]));
        assert_eq!(
            entry_edge_distribution(&c, &StateSet::from([b]), b).unwrap_err(),
            Error::StartInTarget("b".into())
        );
    }

    #[test]
    fn start_in_target_is_point_mass() {
        let c = line();
        let b = c.state("b").unwrap();
        let d = first_entry_distribution(&c, &c.all_states(), b).unwrap();
        assert_eq!(d.mass, BTreeMap::from([(b, r(1, 1))]));
    }
}
