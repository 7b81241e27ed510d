//! The ZeroConf address-allocation chain and its closed forms.
//!
//! A new host picks an address; with probability `q` it is taken and the
//! host enters the probing phase `Probe 0 … Probe N`. Each probe is lost with
//! probability `p` (advance to the next probe, or to `Error` after the last
//! one) and otherwise answered (back to `Start`). With probability `1 − q`
//! the address is free and the run reaches `Ok` after `N + 1` probe rounds.
//! Costs are elapsed time: `r` per probe round, `E` for an undetected
//! collision.

use crate::analysis::{
    certify_ae_until, expected_cost_until, expected_hitting_time, until_probability, UntilQuery,
};
use crate::chain::{Entry, MarkovChain, RewardChain, StateId, StateSet};
use crate::error::{Error, Result};
use crate::scalar::{ExtScalar, Scalar};
use crate::simulate::{self, Estimate, SimConfig};

/// Number of link-local addresses a host chooses from.
pub const ADDRESS_POOL: i64 = 65024;

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroconfParams<S> {
    /// Index of the last probe; probes are numbered `0..=last_probe`.
    pub last_probe: usize,
    /// Probability that a probe or its answer is lost.
    pub p: S,
    /// Probability that the chosen address is already in use.
    pub q: S,
    /// Duration of one probe round.
    pub r: S,
    /// Penalty for ending in a collision.
    pub e: S,
}

impl<S: Scalar> ZeroconfParams<S> {
    /// 16 hosts, three probes, 1% loss, 2 ms rounds, one hour penalty.
    pub fn paper_typical() -> Self {
        ZeroconfParams {
            last_probe: 2,
            p: S::from_ratio(1, 100),
            q: Self::q_for_hosts(16),
            r: S::from_ratio(1, 500),
            e: S::from_usize(3600),
        }
    }

    /// Collision probability when `hosts` addresses of the pool are taken.
    pub fn q_for_hosts(hosts: usize) -> S {
        S::from_usize(hosts) / S::from_usize(ADDRESS_POOL as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (S::zero(), S::one());
        let open = |v: &S| *v > zero && *v < one;
        if !open(&self.p) {
            return Err(Error::InvalidParams(format!("p = {} must lie in (0, 1)", self.p.to_text())));
        }
        if !open(&self.q) {
            return Err(Error::InvalidParams(format!("q = {} must lie in (0, 1)", self.q.to_text())));
        }
        if !self.r.is_finite_value() || self.r < zero {
            return Err(Error::InvalidParams(format!("r = {} must be >= 0", self.r.to_text())));
        }
        if !self.e.is_finite_value() || self.e < zero {
            return Err(Error::InvalidParams(format!("E = {} must be >= 0", self.e.to_text())));
        }
        Ok(())
    }
}

/// States of the ZeroConf chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZcState {
    Start,
    Probe(usize),
    Ok,
    Error,
}

impl ZcState {
    pub fn label(self) -> String {
        match self {
            ZcState::Start => "Start".into(),
            ZcState::Probe(n) => format!("Probe({n})"),
            ZcState::Ok => "Ok".into(),
            ZcState::Error => "Error".into(),
        }
    }
}

/// `Start, Ok, Error, Probe 0 … Probe N`: every state exactly once.
pub fn state_space(last_probe: usize) -> Vec<ZcState> {
    let mut states = vec![ZcState::Start, ZcState::Ok, ZcState::Error];
    states.extend((0..=last_probe).map(ZcState::Probe));
    states
}

/// The built reward chain together with its parameters.
#[derive(Debug, Clone)]
pub struct Zeroconf<S> {
    params: ZeroconfParams<S>,
    rchain: RewardChain<S>,
}

impl<S: Scalar> Zeroconf<S> {
    pub fn params(&self) -> &ZeroconfParams<S> {
        &self.params
    }

    pub fn reward_chain(&self) -> &RewardChain<S> {
        &self.rchain
    }

    pub fn chain(&self) -> &MarkovChain<S> {
        self.rchain.chain()
    }

    pub fn id(&self, state: ZcState) -> StateId {
        self.chain().state(&state.label()).expect("state of the built chain")
    }

    pub fn set(&self, states: &[ZcState]) -> StateSet {
        states.iter().map(|&s| self.id(s)).collect()
    }
}

pub fn build_zeroconf<S: Scalar>(params: &ZeroconfParams<S>) -> Result<Zeroconf<S>> {
    params.validate()?;
    let ZeroconfParams { last_probe, p, q, r, e } = params.clone();
    let one = S::one();
    let lbl = ZcState::label;

    let mut trans = vec![
        Entry::new(lbl(ZcState::Start), lbl(ZcState::Probe(0)), q.clone()),
        Entry::new(lbl(ZcState::Start), lbl(ZcState::Ok), one.clone() - q),
        Entry::new(lbl(ZcState::Ok), lbl(ZcState::Ok), one.clone()),
        Entry::new(lbl(ZcState::Error), lbl(ZcState::Error), one.clone()),
    ];
    let mut costs = vec![
        Entry::new(lbl(ZcState::Start), lbl(ZcState::Probe(0)), r.clone()),
        Entry::new(
            lbl(ZcState::Start),
            lbl(ZcState::Ok),
            r.clone() * S::from_usize(last_probe + 1),
        ),
    ];
    for n in 0..=last_probe {
        let here = lbl(ZcState::Probe(n));
        trans.push(Entry::new(&here, lbl(ZcState::Start), one.clone() - p.clone()));
        if n < last_probe {
            let next = lbl(ZcState::Probe(n + 1));
            trans.push(Entry::new(&here, &next, p.clone()));
            costs.push(Entry::new(&here, &next, r.clone()));
        } else {
            trans.push(Entry::new(&here, lbl(ZcState::Error), p.clone()));
            costs.push(Entry::new(&here, lbl(ZcState::Error), e.clone()));
        }
    }

    let chain = MarkovChain::validate(state_space(last_probe).into_iter().map(lbl), trans)?;
    let rchain = RewardChain::validate(chain, costs)?;
    Ok(Zeroconf { params: params.clone(), rchain })
}

/// Probability of ending in `Error` from `Start`:
/// `q·p^(N+1) / (1 − q·(1 − p^(N+1)))`.
pub fn p_err_closed<S: Scalar>(params: &ZeroconfParams<S>) -> Result<S> {
    params.validate()?;
    let one = S::one();
    let pn1 = params.p.powi(params.last_probe as u32 + 1);
    Ok(params.q.clone() * pn1.clone() / (one.clone() - params.q.clone() * (one - pn1)))
}

/// Probability of ending in `Error` from `Probe n`:
/// `p^(N−n+1) + (1 − p^(N−n+1))·P_err(Start)`.
pub fn p_err_probe_closed<S: Scalar>(params: &ZeroconfParams<S>, n: usize) -> Result<S> {
    if n > params.last_probe {
        return Err(Error::IndexOutOfRange { index: n, max: params.last_probe });
    }
    let start = p_err_closed(params)?;
    let remaining = params.p.powi((params.last_probe - n) as u32 + 1);
    Ok(remaining.clone() + (S::one() - remaining) * start)
}

/// Expected time until `Ok` or `Error` from `Start`:
///
/// ```text
/// ( q·(r + p^(N+1)·E + r·p·(1 − p^N)/(1 − p)) + (1 − q)·r·(N + 1) )
///   / (1 − q + q·p^(N+1))
/// ```
///
/// `r·p·(1 − p^N)/(1 − p)` is the expected probing time of one probing
/// phase beyond its first round; `r·(N + 1)` is charged on the direct
/// `Start → Ok` edge.
pub fn expected_cost_closed<S: Scalar>(params: &ZeroconfParams<S>) -> Result<S> {
    params.validate()?;
    let ZeroconfParams { last_probe, p, q, r, e } = params.clone();
    let one = S::one();
    let pn = p.powi(last_probe as u32);
    let pn1 = pn.clone() * p.clone();
    let probing = r.clone()
        + pn1.clone() * e
        + r.clone() * p.clone() * (one.clone() - pn) / (one.clone() - p);
    let direct = (one.clone() - q.clone()) * r * S::from_usize(last_probe + 1);
    Ok((q.clone() * probing + direct) / (one - q.clone() + q * pn1))
}

/// Closed form next to solver value for one quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck<S> {
    pub closed: S,
    pub solver: S,
    pub diff: S,
}

impl<S: Scalar> CrossCheck<S> {
    pub fn new(closed: S, solver: S) -> Self {
        let diff = closed.clone() - solver.clone();
        CrossCheck { closed, solver, diff }
    }

    pub fn agrees(&self) -> bool {
        self.closed.approx_eq(&self.solver)
    }
}

/// A published numeric claim `value ≤ bound`, recorded rather than enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundAudit<S> {
    pub claim: &'static str,
    pub value: S,
    pub bound: S,
    pub holds: bool,
}

impl<S: Scalar> BoundAudit<S> {
    fn new(claim: &'static str, value: S, bound: S) -> Self {
        let holds = value <= bound;
        BoundAudit { claim, value, bound, holds }
    }
}

#[derive(Debug, Clone)]
pub struct ZeroconfSimulation {
    pub p_err: Estimate,
    pub cost: Estimate,
}

#[derive(Debug, Clone)]
pub struct ZeroconfReport<S> {
    pub params: ZeroconfParams<S>,
    pub state_count: usize,
    pub p_err: CrossCheck<S>,
    /// `P_err(Probe n)` for `n = 0..=N`.
    pub p_err_probe: Vec<CrossCheck<S>>,
    /// `P_err(Start) = q·P_err(Probe 0)`.
    pub start_iter_identity: bool,
    pub cost: CrossCheck<S>,
    pub expected_steps: ExtScalar<S>,
    /// Almost-sure termination in `{Ok, Error}` certified from each state.
    pub ae_term: Vec<(String, bool)>,
    pub p_err_audit: BoundAudit<S>,
    pub cost_audit: BoundAudit<S>,
    pub simulation: Option<ZeroconfSimulation>,
}

impl<S: Scalar> ZeroconfReport<S> {
    pub fn all_cross_checks_agree(&self) -> bool {
        self.p_err.agrees() && self.cost.agrees() && self.p_err_probe.iter().all(CrossCheck::agrees)
    }
}

/// Builds the chain, evaluates every closed form and its solver
/// counterpart, certifies termination, and optionally simulates.
pub fn zeroconf_report<S: Scalar>(
    params: &ZeroconfParams<S>,
    sim: Option<&SimConfig>,
) -> Result<ZeroconfReport<S>> {
    let zc = build_zeroconf(params)?;
    let chain = zc.chain();
    let all = chain.all_states();
    let start = zc.id(ZcState::Start);
    let error = zc.set(&[ZcState::Error]);
    let done = zc.set(&[ZcState::Ok, ZcState::Error]);

    let p_err_at = |s: StateId| until_probability(chain, &UntilQuery::new(all.clone(), error.clone(), s));
    let p_err = CrossCheck::new(p_err_closed(params)?, p_err_at(start)?);
    let p_err_probe = (0..=params.last_probe)
        .map(|n| Ok(CrossCheck::new(p_err_probe_closed(params, n)?, p_err_at(zc.id(ZcState::Probe(n)))?)))
        .collect::<Result<Vec<_>>>()?;
    let start_iter_identity = p_err
        .solver
        .approx_eq(&(params.q.clone() * p_err_probe[0].solver.clone()));

    let cost_solver = expected_cost_until(zc.reward_chain(), &done, start)?;
    let cost_solver = cost_solver
        .finite()
        .cloned()
        .ok_or_else(|| Error::InvalidParams("expected cost is infinite".into()))?;
    let cost = CrossCheck::new(expected_cost_closed(params)?, cost_solver);
    let expected_steps = expected_hitting_time(chain, &done, start)?;

    let ae_term = chain
        .states()
        .map(|s| {
            let q = UntilQuery::new(all.clone(), done.clone(), s);
            Ok((chain.label(s).to_string(), certify_ae_until(chain, &q)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let p_err_audit = BoundAudit::new(
        "P_err(Start) <= 1/10^13",
        p_err.solver.clone(),
        S::one() / S::from_usize(10).powi(13),
    );
    let cost_audit = BoundAudit::new("C_fin(Start) <= 0.007", cost.solver.clone(), S::from_ratio(7, 1000));

    let simulation = match sim {
        Some(cfg) => {
            let query = UntilQuery::new(all.clone(), error.clone(), start);
            Some(ZeroconfSimulation {
                p_err: simulate::estimate_until(chain, &query, cfg)?,
                cost: simulate::estimate_cost(zc.reward_chain(), &done, start, cfg)?,
            })
        }
        None => None,
    };

    Ok(ZeroconfReport {
        params: params.clone(),
        state_count: chain.len(),
        p_err,
        p_err_probe,
        start_iter_identity,
        cost,
        expected_steps,
        ae_term,
        p_err_audit,
        cost_audit,
        simulation,
    })
}
