//! Validated Markov chains and Markov reward chains.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

/// Index of a state in its chain's state table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub type StateSet = BTreeSet<StateId>;

/// One sparse matrix entry addressed by state labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry<S> {
    pub from: String,
    pub to: String,
    pub value: S,
}

impl<S> Entry<S> {
    pub fn new(from: impl Into<String>, to: impl Into<String>, value: S) -> Self {
        Entry { from: from.into(), to: to.into(), value }
    }
}

/// A finite discrete-time Markov chain with a row-stochastic transition
/// matrix. Immutable once validated.
#[derive(Debug, Clone)]
pub struct MarkovChain<S> {
    labels: Vec<String>,
    index: HashMap<String, StateId>,
    // Rows sorted by column, zero entries never stored.
    rows: Vec<Vec<(StateId, S)>>,
}

impl<S: Scalar> MarkovChain<S> {
    /// Checks the state table and transition entries and builds the chain.
    /// Entries with value zero are treated as absent.
    pub fn validate<L, I>(states: L, transitions: I) -> Result<Self>
    where
        L: IntoIterator,
        L::Item: Into<String>,
        I: IntoIterator<Item = Entry<S>>,
    {
        let labels: Vec<String> = states.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyStateSpace);
        }
        let index = build_index(&labels)?;
        let rows = build_rows(&labels, &index, transitions, |from, to, v| {
            if !v.is_finite_value() {
                Err(Error::NonFinite(from.into(), to.into()))
            } else if v.is_negative_value() {
                Err(Error::NegativeProbability(from.into(), to.into()))
            } else {
                Ok(())
            }
        })?;

        for (s, row) in rows.iter().enumerate() {
            let sum = row.iter().fold(S::zero(), |acc, (_, p)| acc + p.clone());
            if !sum.is_unit_sum() {
                return Err(Error::RowSumNotOne(labels[s].clone(), sum.to_text()));
            }
        }
        Ok(MarkovChain { labels, index, rows })
    }

    pub fn mode(&self) -> Mode {
        S::MODE
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, s: StateId) -> &str {
        &self.labels[s.0]
    }

    pub fn state(&self, label: &str) -> Result<StateId> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    /// Resolves a collection of labels into a state set.
    pub fn state_set<'a, I>(&self, labels: I) -> Result<StateSet>
    where
        I: IntoIterator<Item = &'a str>,
    {
        labels.into_iter().map(|l| self.state(l)).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.labels.len()).map(StateId)
    }

    pub fn all_states(&self) -> StateSet {
        self.states().collect()
    }

    pub fn check(&self, s: StateId) -> Result<StateId> {
        if s.0 < self.labels.len() {
            Ok(s)
        } else {
            Err(Error::UnknownState(s.to_string()))
        }
    }

    pub fn check_set(&self, set: &StateSet) -> Result<()> {
        set.iter().try_for_each(|&s| self.check(s).map(|_| ()))
    }

    /// Nonzero entries of the row of `s`, sorted by target state.
    pub fn row(&self, s: StateId) -> &[(StateId, S)] {
        &self.rows[s.0]
    }

    /// `τ s t`, zero when no entry is stored.
    pub fn prob(&self, s: StateId, t: StateId) -> S {
        lookup(&self.rows[s.0], t)
    }

    pub fn successors(&self, s: StateId) -> Result<StateSet> {
        self.check(s)?;
        Ok(self.rows[s.0].iter().map(|&(t, _)| t).collect())
    }

    /// Probability of the cylinder of paths from `start` whose first
    /// `prefix.len()` states are `prefix` (the start state itself is not
    /// part of the prefix).
    pub fn path_prefix_prob(&self, start: StateId, prefix: &[StateId]) -> Result<S> {
        self.check(start)?;
        let mut prob = S::one();
        let mut prev = start;
        for &next in prefix {
            self.check(next)?;
            prob = prob * self.prob(prev, next);
            prev = next;
        }
        Ok(prob)
    }

    /// Same chain in float arithmetic.
    pub fn to_float(&self) -> MarkovChain<f64> {
        MarkovChain {
            labels: self.labels.clone(),
            index: self.index.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(t, p)| (*t, p.to_f64())).collect())
                .collect(),
        }
    }
}

/// A Markov chain with a non-negative cost on each transition.
#[derive(Debug, Clone)]
pub struct RewardChain<S> {
    chain: MarkovChain<S>,
    costs: Vec<Vec<(StateId, S)>>,
}

impl<S: Scalar> RewardChain<S> {
    /// Attaches a cost matrix to a validated chain. Costs on edges with zero
    /// probability are allowed and never contribute.
    pub fn validate<I>(chain: MarkovChain<S>, costs: I) -> Result<Self>
    where
        I: IntoIterator<Item = Entry<S>>,
    {
        let costs = build_rows(&chain.labels, &chain.index, costs, |from, to, v| {
            if !v.is_finite_value() {
                Err(Error::NonFinite(from.into(), to.into()))
            } else if v.is_negative_value() {
                Err(Error::NegativeCost(from.into(), to.into()))
            } else {
                Ok(())
            }
        })?;
        Ok(RewardChain { chain, costs })
    }

    pub fn chain(&self) -> &MarkovChain<S> {
        &self.chain
    }

    pub fn cost(&self, s: StateId, t: StateId) -> S {
        lookup(&self.costs[s.0], t)
    }

    /// Nonzero cost entries of the row of `s`.
    pub fn cost_row(&self, s: StateId) -> &[(StateId, S)] {
        &self.costs[s.0]
    }

    pub fn to_float(&self) -> RewardChain<f64> {
        RewardChain {
            chain: self.chain.to_float(),
            costs: self
                .costs
                .iter()
                .map(|row| row.iter().map(|(t, c)| (*t, c.to_f64())).collect())
                .collect(),
        }
    }
}

fn lookup<S: Scalar>(row: &[(StateId, S)], t: StateId) -> S {
    row.binary_search_by_key(&t, |(c, _)| *c)
        .map(|i| row[i].1.clone())
        .unwrap_or_else(|_| S::zero())
}

fn build_index(labels: &[String]) -> Result<HashMap<String, StateId>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        if index.insert(label.clone(), StateId(i)).is_some() {
            return Err(Error::DuplicateState(label.clone()));
        }
    }
    Ok(index)
}

fn build_rows<S, I, F>(
    labels: &[String],
    index: &HashMap<String, StateId>,
    entries: I,
    check: F,
) -> Result<Vec<Vec<(StateId, S)>>>
where
    S: Scalar,
    I: IntoIterator<Item = Entry<S>>,
    F: Fn(&str, &str, &S) -> Result<()>,
{
    let resolve = |label: &str| {
        index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    };
    let mut rows: Vec<Vec<(StateId, S)>> = vec![Vec::new(); labels.len()];
    let mut seen = BTreeSet::new();
    for Entry { from, to, value } in entries {
        let s = resolve(&from)?;
        let t = resolve(&to)?;
        check(&from, &to, &value)?;
        if !seen.insert((s, t)) {
            return Err(Error::DuplicateEntry(from, to));
        }
        if !value.is_zero() {
            rows[s.0].push((t, value));
        }
    }
    for row in &mut rows {
        row.sort_by_key(|(t, _)| *t);
    }
    Ok(rows)
}
