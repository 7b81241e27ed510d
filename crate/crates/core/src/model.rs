//! JSON model files.
//!
//! ```json
//! {
//!   "states": ["a", "b"],
//!   "transitions": [{"from": "a", "to": "b", "prob": "1/2"}, ...],
//!   "rewards": [{"from": "a", "to": "b", "cost": "0.25"}]
//! }
//! ```
//!
//! `prob` and `cost` are number literals in the grammar of
//! [`parse_rational`](crate::scalar::parse_rational), given either as JSON
//! strings or as JSON numbers (read through their decimal text, so `0.01` is
//! exactly `1/100`). `rewards` may be omitted.

use serde::{Deserialize, Serialize};

use crate::chain::{Entry, MarkovChain, RewardChain};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub transitions: Vec<TransitionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rewards: Vec<RewardRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub from: String,
    pub to: String,
    pub prob: Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardRecord {
    pub from: String,
    pub to: String,
    pub cost: Literal,
}

/// A number literal as it appeared in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Text(String),
    Number(serde_json::Number),
}

impl Literal {
    pub fn parse<S: Scalar>(&self) -> Result<S> {
        match self {
            Literal::Text(s) => S::parse(s),
            Literal::Number(n) => S::parse(&n.to_string()),
        }
    }
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn has_rewards(&self) -> bool {
        !self.rewards.is_empty()
    }

    pub fn to_chain<S: Scalar>(&self) -> Result<MarkovChain<S>> {
        let entries = self
            .transitions
            .iter()
            .map(|t| Ok(Entry::new(&t.from, &t.to, t.prob.parse::<S>()?)))
            .collect::<Result<Vec<_>>>()?;
        MarkovChain::validate(self.states.iter().cloned(), entries)
    }

    /// Builds the reward chain; a file without `rewards` yields the zero
    /// cost matrix.
    pub fn to_reward_chain<S: Scalar>(&self) -> Result<RewardChain<S>> {
        let chain = self.to_chain()?;
        let costs = self
            .rewards
            .iter()
            .map(|r| Ok(Entry::new(&r.from, &r.to, r.cost.parse::<S>()?)))
            .collect::<Result<Vec<_>>>()?;
        RewardChain::validate(chain, costs)
    }

    pub fn from_chain<S: Scalar>(chain: &MarkovChain<S>) -> Self {
        let transitions = chain
            .states()
            .flat_map(|s| {
                chain.row(s).iter().map(move |(t, p)| TransitionRecord {
                    from: chain.label(s).to_string(),
                    to: chain.label(*t).to_string(),
                    prob: Literal::Text(p.to_text()),
                })
            })
            .collect();
        ModelFile { states: chain.labels().to_vec(), transitions, rewards: Vec::new() }
    }

    pub fn from_reward_chain<S: Scalar>(rchain: &RewardChain<S>) -> Self {
        let chain = rchain.chain();
        let mut file = Self::from_chain(chain);
        file.rewards = chain
            .states()
            .flat_map(|s| {
                rchain.cost_row(s).iter().map(move |(t, c)| RewardRecord {
                    from: chain.label(s).to_string(),
                    to: chain.label(*t).to_string(),
                    cost: Literal::Text(c.to_text()),
                })
            })
            .collect();
        file
    }
}
