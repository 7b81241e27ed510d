//! The Crowds route-establishment chain and its anonymity measures.
//!
//! From `Start` the initiator `Init i` is drawn from `init`. Every route
//! then forwards to a uniformly chosen jondo `Mix j`; each mixing jondo
//! forwards again with probability `p_f` (to a uniform jondo) and otherwise
//! contacts the server (`End`). Collaborators try to identify the initiator
//! from the last honest jondo that forwarded to one of them.

use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::{
    certify_ae_until, conditional_probability, entry_edge_distribution, expected_hitting_time,
    until_probability, UntilQuery,
};
use crate::chain::{Entry, MarkovChain, StateId, StateSet};
use crate::error::{Error, Result};
use crate::info::{mutual_information, JointDistribution};
use crate::scalar::{ExtScalar, Scalar};
use crate::zeroconf::CrossCheck;

#[derive(Debug, Clone, PartialEq)]
pub struct CrowdsParams<S> {
    pub jondos: Vec<String>,
    pub colls: BTreeSet<String>,
    /// Forwarding probability.
    pub p_f: S,
    /// Initiator distribution; missing jondos have mass 0.
    pub init: BTreeMap<String, S>,
}

impl<S: Scalar> CrowdsParams<S> {
    /// `jondos` participants of which the last `colls` collaborate, honest
    /// ones labelled `J1…`, collaborators `C1…`, uniform initiator.
    pub fn uniform(jondos: usize, colls: usize, p_f: S) -> Result<Self> {
        if colls == 0 || colls >= jondos {
            return Err(Error::InvalidParams(format!(
                "need 0 < colls < jondos, got colls = {colls}, jondos = {jondos}"
            )));
        }
        let honest: Vec<String> = (1..=jondos - colls).map(|i| format!("J{i}")).collect();
        let coll: Vec<String> = (1..=colls).map(|i| format!("C{i}")).collect();
        let share = S::one() / S::from_usize(honest.len());
        let init = honest.iter().map(|j| (j.clone(), share.clone())).collect();
        let params = CrowdsParams {
            jondos: honest.into_iter().chain(coll.iter().cloned()).collect(),
            colls: coll.into_iter().collect(),
            p_f,
            init,
        };
        params.validate()?;
        Ok(params)
    }

    /// The three-jondo network with one collaborator and `p_f = 1/2`.
    pub fn fig3() -> Self {
        Self::uniform(3, 1, S::from_ratio(1, 2)).expect("valid preset")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.p_f > S::zero() && self.p_f < S::one()) {
            return bad(format!("p_f = {} must lie in (0, 1)", self.p_f.to_text()));
        }
        if self.jondos.is_empty() {
            return bad("jondos must be non-empty".into());
        }
        let unique: BTreeSet<&String> = self.jondos.iter().collect();
        if unique.len() != self.jondos.len() {
            return bad("jondo labels must be unique".into());
        }
        if self.colls.is_empty() {
            return bad("colls must be non-empty".into());
        }
        if let Some(c) = self.colls.iter().find(|c| !unique.contains(c)) {
            return bad(format!("collaborator `{c}` is not a jondo"));
        }
        if self.colls.len() >= self.jondos.len() {
            return bad("colls must be a strict subset of jondos".into());
        }
        let mut total = S::zero();
        for (j, v) in &self.init {
            if !unique.contains(j) {
                return bad(format!("init names unknown jondo `{j}`"));
            }
            if !v.is_finite_value() || v.is_negative_value() {
                return bad(format!("init({j}) = {} is negative", v.to_text()));
            }
            if self.colls.contains(j) && !v.is_zero() {
                return bad(format!("init({j}) must be 0 for a collaborator"));
            }
            total = total + v.clone();
        }
        if !total.is_unit_sum() {
            return bad(format!("init sums to {}", total.to_text()));
        }
        Ok(())
    }

    /// `J`, the number of jondos.
    pub fn j(&self) -> usize {
        self.jondos.len()
    }

    /// `H`, the number of honest jondos.
    pub fn h(&self) -> usize {
        self.jondos.len() - self.colls.len()
    }

    pub fn honest(&self) -> impl Iterator<Item = &String> + '_ {
        self.jondos.iter().filter(|j| !self.colls.contains(*j))
    }

    pub fn init_of(&self, jondo: &str) -> S {
        self.init.get(jondo).cloned().unwrap_or_else(S::zero)
    }

    fn ratio_h_j(&self) -> S {
        S::from_usize(self.h()) / S::from_usize(self.j())
    }
}

pub fn init_label(j: &str) -> String {
    format!("Init({j})")
}

pub fn mix_label(j: &str) -> String {
    format!("Mix({j})")
}

/// Role of a state in the Crowds chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CState {
    Start,
    Init(String),
    Mix(String),
    End,
}

/// The built chain with state lookups.
#[derive(Debug, Clone)]
pub struct Crowds<S> {
    params: CrowdsParams<S>,
    chain: MarkovChain<S>,
    roles: Vec<CState>,
}

impl<S: Scalar> Crowds<S> {
    pub fn params(&self) -> &CrowdsParams<S> {
        &self.params
    }

    pub fn chain(&self) -> &MarkovChain<S> {
        &self.chain
    }

    pub fn start(&self) -> StateId {
        StateId(0)
    }

    pub fn end(&self) -> StateId {
        StateId(self.roles.len() - 1)
    }

    pub fn role(&self, s: StateId) -> &CState {
        &self.roles[s.0]
    }

    pub fn init_state(&self, j: &str) -> Result<StateId> {
        self.chain.state(&init_label(j))
    }

    pub fn mix_state(&self, j: &str) -> Result<StateId> {
        self.chain.state(&mix_label(j))
    }

    /// The jondo of an `Init` or `Mix` state.
    pub fn jondo_of(&self, s: StateId) -> Option<&str> {
        match &self.roles[s.0] {
            CState::Init(j) | CState::Mix(j) => Some(j),
            CState::Start | CState::End => None,
        }
    }

    /// `{Mix c | c ∈ colls}`.
    pub fn coll_mixes(&self) -> StateSet {
        self.chain
            .states()
            .filter(|&s| matches!(&self.roles[s.0], CState::Mix(j) if self.params.colls.contains(j)))
            .collect()
    }

    fn is_coll_mix(&self, s: StateId) -> bool {
        matches!(&self.roles[s.0], CState::Mix(j) if self.params.colls.contains(j))
    }
}

pub fn build_crowds<S: Scalar>(params: &CrowdsParams<S>) -> Result<Crowds<S>> {
    params.validate()?;
    let mut roles = vec![CState::Start];
    roles.extend(params.honest().map(|j| CState::Init(j.clone())));
    roles.extend(params.jondos.iter().map(|j| CState::Mix(j.clone())));
    roles.push(CState::End);
    let label = |s: &CState| match s {
        CState::Start => "Start".to_string(),
        CState::Init(j) => init_label(j),
        CState::Mix(j) => mix_label(j),
        CState::End => "End".to_string(),
    };

    let share = S::one() / S::from_usize(params.j());
    let forward = params.p_f.clone() * share.clone();
    let mut trans = Vec::new();
    for j in params.honest() {
        trans.push(Entry::new("Start", init_label(j), params.init_of(j)));
        for k in &params.jondos {
            trans.push(Entry::new(init_label(j), mix_label(k), share.clone()));
        }
    }
    for j in &params.jondos {
        for k in &params.jondos {
            trans.push(Entry::new(mix_label(j), mix_label(k), forward.clone()));
        }
        trans.push(Entry::new(mix_label(j), "End", S::one() - params.p_f.clone()));
    }
    trans.push(Entry::new("End", "End", S::one()));

    let chain = MarkovChain::validate(roles.iter().map(label), trans)?;
    Ok(Crowds { params: params.clone(), chain, roles })
}

/// Probability that a collaborator joins the mixing phase:
/// `(1 − H/J) / (1 − H/J·p_f)`.
pub fn prob_hit_colls<S: Scalar>(params: &CrowdsParams<S>) -> Result<S> {
    params.validate()?;
    let hj = params.ratio_h_j();
    Ok((S::one() - hj.clone()) / (S::one() - hj * params.p_f.clone()))
}

/// `Pr(first-jondo = i ∧ last-ncoll = l | hit-colls)`
/// `= init i · (p_f/J + [i = l]·(1 − H/J·p_f))`.
pub fn joint_first_last<S: Scalar>(params: &CrowdsParams<S>, i: &str, l: &str) -> Result<S> {
    params.validate()?;
    for j in [i, l] {
        if !params.honest().any(|h| h == j) {
            return Err(Error::NotHonestJondo(j.to_string()));
        }
    }
    let mut inner = params.p_f.clone() / S::from_usize(params.j());
    if i == l {
        inner = inner + (S::one() - params.ratio_h_j() * params.p_f.clone());
    }
    Ok(params.init_of(i) * inner)
}

/// `Pr(first-jondo = last-ncoll | hit-colls) = 1 − (H − 1)/J · p_f`.
pub fn prob_first_eq_last<S: Scalar>(params: &CrowdsParams<S>) -> Result<S> {
    params.validate()?;
    let h1 = S::from_usize(params.h() - 1);
    Ok(S::one() - h1 / S::from_usize(params.j()) * params.p_f.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbableInnocence<S> {
    pub holds: bool,
    /// `J / (2(H − 1))`, infinite when `H = 1`.
    pub threshold: ExtScalar<S>,
}

/// Sufficient condition `H > 1 ∧ p_f ≥ J/(2(H − 1))` for
/// `prob_first_eq_last ≤ 1/2`.
pub fn probable_innocence<S: Scalar>(params: &CrowdsParams<S>) -> ProbableInnocence<S> {
    if params.h() <= 1 {
        return ProbableInnocence { holds: false, threshold: ExtScalar::Infinity };
    }
    let threshold = S::from_usize(params.j()) / S::from_usize(2 * (params.h() - 1));
    ProbableInnocence { holds: params.p_f >= threshold, threshold: ExtScalar::Finite(threshold) }
}

/// Law of a jondo-valued path functional plus the mass where it is
/// undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct JondoLaw<S> {
    pub mass: BTreeMap<String, S>,
    pub never: S,
}

fn add_to<S: Scalar>(map: &mut BTreeMap<String, S>, key: &str, v: S) {
    let slot = map.entry(key.to_string()).or_insert_with(S::zero);
    *slot = slot.clone() + v;
}

/// Law of the jondo contacting the server: the `Mix` predecessor at the
/// first entry into `End`.
pub fn last_jondo_distribution<S: Scalar>(crowds: &Crowds<S>) -> Result<JondoLaw<S>> {
    let end = StateSet::from([crowds.end()]);
    let edges = entry_edge_distribution(crowds.chain(), &end, crowds.start())?;
    let mut mass = BTreeMap::new();
    for (u, v) in edges.predecessor_marginal() {
        let j = crowds.jondo_of(u).ok_or_else(|| Error::InvalidParams("End entered from a non-jondo".into()))?;
        add_to(&mut mass, j, v);
    }
    Ok(JondoLaw { mass, never: edges.never })
}

/// Builds the joint law of `(initiator, jondo-of(predecessor))` at the first
/// entry into `target`, from each `Init i` weighted by `init i`.
fn initiator_joint<S: Scalar>(
    crowds: &Crowds<S>,
    target: &StateSet,
) -> Result<BTreeMap<(String, String), S>> {
    let params = crowds.params();
    let mut joint = BTreeMap::new();
    for i in params.honest() {
        for l in params.honest() {
            joint.insert((i.clone(), l.clone()), S::zero());
        }
    }
    for i in params.honest() {
        let w = params.init_of(i);
        if w.is_zero() {
            continue;
        }
        let edges = entry_edge_distribution(crowds.chain(), target, crowds.init_state(i)?)?;
        for (u, v) in edges.predecessor_marginal() {
            let l = crowds.jondo_of(u).expect("predecessors are Init or Mix states");
            let slot = joint.entry((i.clone(), l.to_string())).or_insert_with(S::zero);
            *slot = slot.clone() + w.clone() * v;
        }
    }
    Ok(joint)
}

/// Exact joint law of `(first-jondo, last-jondo)` from the solver.
pub fn first_last_jondo_joint<S: Scalar>(crowds: &Crowds<S>) -> Result<JointDistribution<S>> {
    let end = StateSet::from([crowds.end()]);
    let mut joint = initiator_joint(crowds, &end)?;
    // last-jondo ranges over every jondo, collaborators included.
    for i in crowds.params().honest() {
        for c in &crowds.params().colls {
            joint.entry((i.clone(), c.clone())).or_insert_with(S::zero);
        }
    }
    JointDistribution::new(joint.into_iter().map(|((i, l), v)| (i, l, v)))
}

/// Solver value of `Pr(hit-colls)`.
pub fn prob_hit_colls_solver<S: Scalar>(crowds: &Crowds<S>) -> Result<S> {
    let q = UntilQuery::new(crowds.chain().all_states(), crowds.coll_mixes(), crowds.start());
    until_probability(crowds.chain(), &q)
}

/// Conditional joint of `(first-jondo, last-ncoll)` given `hit-colls`,
/// obtained from first-entry edges into the collaborators' `Mix` states.
pub fn conditional_joint_solver<S: Scalar>(crowds: &Crowds<S>) -> Result<JointDistribution<S>> {
    let joint = initiator_joint(crowds, &crowds.coll_mixes())?;
    let hit = prob_hit_colls_solver(crowds)?;
    let cells = joint
        .into_iter()
        .map(|((i, l), v)| Ok((i, l, conditional_probability(&v, &hit)?)))
        .collect::<Result<Vec<_>>>()?;
    JointDistribution::new(cells)
}

/// Conditional joint of `(first-jondo, last-ncoll)` from the closed form.
pub fn conditional_joint_closed<S: Scalar>(params: &CrowdsParams<S>) -> Result<JointDistribution<S>> {
    let mut cells = Vec::new();
    for i in params.honest() {
        for l in params.honest() {
            cells.push((i.clone(), l.clone(), joint_first_last(params, i, l)?));
        }
    }
    JointDistribution::new(cells)
}

/// Mutual information (bits) between `first-jondo` and `last-ncoll` under
/// the measure conditioned on `hit-colls`.
pub fn mi_exact<S: Scalar>(params: &CrowdsParams<S>) -> Result<f64> {
    mutual_information(&conditional_joint_closed(params)?)
}

/// `(1 − (H − 1)/J · p_f) · log₂ H`.
pub fn mi_bound<S: Scalar>(params: &CrowdsParams<S>) -> Result<f64> {
    Ok(prob_first_eq_last(params)?.to_f64() * (params.h() as f64).log2())
}

/// Path functionals of one sampled route (a path starting at `Start`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteSummary {
    /// Index-based length: number of `Mix` states minus one.
    pub len: usize,
    pub first_jondo: String,
    pub last_jondo: String,
    /// Honest jondo that forwarded to the first collaborator, if any.
    pub last_ncoll: Option<String>,
}

/// Reads the route functionals off a sampled path `Start, Init i, Mix…,
/// End, End…`. Returns `None` when the path does not have that shape (or
/// never reaches `End`).
pub fn route_summary<S: Scalar>(crowds: &Crowds<S>, path: &[StateId]) -> Option<RouteSummary> {
    if path.first() != Some(&crowds.start()) {
        return None;
    }
    let end_at = path.iter().position(|&s| s == crowds.end())?;
    if end_at < 3 || path[end_at..].iter().any(|&s| s != crowds.end()) {
        return None;
    }
    let first_jondo = match crowds.role(path[1]) {
        CState::Init(j) if !crowds.params().colls.contains(j) => j.clone(),
        _ => return None,
    };
    let mixes = &path[2..end_at];
    if !mixes.iter().all(|&s| matches!(crowds.role(s), CState::Mix(_))) {
        return None;
    }
    let last_jondo = crowds.jondo_of(path[end_at - 1])?.to_string();
    let last_ncoll = path[1..end_at]
        .iter()
        .position(|&s| crowds.is_coll_mix(s))
        .map(|k| crowds.jondo_of(path[k]).expect("jondo state").to_string());
    Some(RouteSummary { len: mixes.len() - 1, first_jondo, last_jondo, last_ncoll })
}

#[derive(Debug, Clone)]
pub struct CrowdsReport<S> {
    pub j: usize,
    pub h: usize,
    pub p_f: S,
    pub state_count: usize,
    pub hit_colls: CrossCheck<S>,
    pub first_eq_last: CrossCheck<S>,
    /// Largest `|closed − solver|` over the conditional joint cells.
    pub joint_max_diff: S,
    pub joint_agrees: bool,
    pub innocence: ProbableInnocence<S>,
    pub mi_exact: f64,
    pub mi_solver: f64,
    pub mi_bound: f64,
    /// Termination in `End` certified from `Start`.
    pub ae_end: bool,
    pub expected_route_steps: ExtScalar<S>,
    pub last_jondo_uniform: bool,
    pub first_last_independent: bool,
    /// Whether `(first-jondo, last-ncoll)` factorises (generally not).
    pub first_ncoll_independent: bool,
}

pub fn crowds_report<S: Scalar>(params: &CrowdsParams<S>) -> Result<CrowdsReport<S>> {
    let crowds = build_crowds(params)?;
    let chain = crowds.chain();

    let hit_colls = CrossCheck::new(prob_hit_colls(params)?, prob_hit_colls_solver(&crowds)?);
    let closed = conditional_joint_closed(params)?;
    let solved = conditional_joint_solver(&crowds)?;
    let mut joint_max_diff = S::zero();
    let mut joint_agrees = true;
    for ((i, l), v) in closed.cells() {
        let s = solved.get(i, l);
        let d = crate::scalar::abs(&(v.clone() - s.clone()));
        joint_agrees &= v.approx_eq(&s);
        if d > joint_max_diff {
            joint_max_diff = d;
        }
    }
    let diagonal = params
        .honest()
        .fold(S::zero(), |acc, i| acc + solved.get(i, i));
    let first_eq_last = CrossCheck::new(prob_first_eq_last(params)?, diagonal);

    let end = StateSet::from([crowds.end()]);
    let ae_end = certify_ae_until(chain, &UntilQuery::new(chain.all_states(), end.clone(), crowds.start()))?;
    let expected_route_steps = expected_hitting_time(chain, &end, crowds.start())?;

    let last = last_jondo_distribution(&crowds)?;
    let share = S::one() / S::from_usize(params.j());
    let last_jondo_uniform = last.never.approx_eq(&S::zero())
        && params.jondos.iter().all(|j| {
            last.mass.get(j).is_some_and(|v| v.approx_eq(&share))
        });

    Ok(CrowdsReport {
        j: params.j(),
        h: params.h(),
        p_f: params.p_f.clone(),
        state_count: chain.len(),
        hit_colls,
        first_eq_last,
        joint_max_diff,
        joint_agrees,
        innocence: probable_innocence(params),
        mi_exact: mi_exact(params)?,
        mi_solver: mutual_information(&solved)?,
        mi_bound: mi_bound(params)?,
        ae_end,
        expected_route_steps,
        last_jondo_uniform,
        first_last_independent: first_last_jondo_joint(&crowds)?.is_product(),
        first_ncoll_independent: solved.is_product(),
    })
}
