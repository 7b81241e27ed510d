//! Qualitative and quantitative analysis of until-properties, hitting times,
//! accumulated costs, and first-entry laws.
//!
//! Every path query is about the path `start·ω`: the start state occupies
//! index 0, so a start state inside the target set answers immediately.

mod entry;
mod graph;
mod solve;

pub use entry::{entry_edge_distribution, first_entry_distribution, Distribution, EdgeDistribution};
pub use graph::{certify_ae_until, reachable, until_prob_is_zero};
pub use solve::{expected_cost_until, expected_hitting_time, until_probabilities, until_probability};

use crate::chain::{MarkovChain, StateId, StateSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Paths that stay in `phi` until they reach `psi`, measured from `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UntilQuery {
    pub phi: StateSet,
    pub psi: StateSet,
    pub start: StateId,
}

impl UntilQuery {
    pub fn new(phi: StateSet, psi: StateSet, start: StateId) -> Self {
        UntilQuery { phi, psi, start }
    }

    /// Resolves labels against `chain`.
    pub fn from_labels<S: Scalar>(
        chain: &MarkovChain<S>,
        phi: &[&str],
        psi: &[&str],
        start: &str,
    ) -> Result<Self> {
        Ok(UntilQuery {
            phi: chain.state_set(phi.iter().copied())?,
            psi: chain.state_set(psi.iter().copied())?,
            start: chain.state(start)?,
        })
    }

    pub fn check<S: Scalar>(&self, chain: &MarkovChain<S>) -> Result<()> {
        chain.check(self.start)?;
        chain.check_set(&self.phi)?;
        chain.check_set(&self.psi)
    }
}

/// `Pr(P ∧ Q) / Pr(Q)`.
pub fn conditional_probability<S: Scalar>(p_joint: &S, p_cond: &S) -> Result<S> {
    if p_cond.is_zero() {
        return Err(Error::ConditionHasZeroProbability);
    }
    if p_joint.is_negative_value() || p_joint > p_cond || *p_cond > S::one() {
        return Err(Error::InvalidDistribution(format!(
            "need 0 <= joint <= condition <= 1, got {} and {}",
            p_joint.to_text(),
            p_cond.to_text()
        )));
    }
    Ok(p_joint.clone() / p_cond.clone())
}
