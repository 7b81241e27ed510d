//! Seeded Monte Carlo sampling of chain paths.
//!
//! Path `k` of a run with seed `s` draws from its own xoshiro256** stream.
//! The stream's seed is the SplitMix64 output at position `k + 1` of the
//! SplitMix64 sequence started at `s`; since SplitMix64 advances its state by
//! a fixed odd constant, jumping to position `k` is a single
//! multiply-add. Streams therefore depend only on `(seed, k)`, and any
//! parallel partition of the paths yields the same samples.
//!
//! Sampling always runs in `f64`, even for rational chains.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;

use crate::analysis::{until_prob_is_zero, UntilQuery};
use crate::chain::{MarkovChain, RewardChain, StateId, StateSet};
use crate::crowds::{route_summary, Crowds};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_STEPS: usize = 10_000;

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_output(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> Xoshiro256StarStar {
    let state = seed.wrapping_add(SPLITMIX_GAMMA.wrapping_mul(index.wrapping_add(1)));
    Xoshiro256StarStar::seed_from_u64(splitmix_output(state))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub samples: u64,
    /// Maximum number of transitions per path.
    pub max_steps: usize,
}

impl SimConfig {
    pub fn new(seed: u64, samples: u64, max_steps: usize) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(SimConfig { seed, samples, max_steps })
    }

    pub fn with_samples(seed: u64, samples: u64) -> Result<Self> {
        Self::new(seed, samples, DEFAULT_MAX_STEPS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples_used: u64,
    /// Paths still undecided after `max_steps` transitions.
    pub censored: u64,
}

impl Estimate {
    pub fn decided(&self) -> u64 {
        self.samples_used - self.censored
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

/// A realised finite path prefix and the stream it was drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSample {
    pub states: Vec<StateId>,
    pub seed: u64,
    pub index: u64,
}

/// Cumulative `f64` rows for inverse-CDF sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    rows: Vec<Vec<(StateId, f64)>>,
}

impl Sampler {
    pub fn new<S: Scalar>(chain: &MarkovChain<S>) -> Self {
        let rows = chain
            .states()
            .map(|s| {
                let mut acc = 0.0;
                chain
                    .row(s)
                    .iter()
                    .map(|(t, p)| {
                        acc += p.to_f64();
                        (*t, acc)
                    })
                    .collect()
            })
            .collect();
        Sampler { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn step<R: Rng>(&self, s: StateId, rng: &mut R) -> StateId {
        let row = &self.rows[s.0];
        let u: f64 = rng.random();
        // Cumulative sums strictly increase; rounding at the top of the row
        // falls through to the last entry.
        row.iter()
            .find(|(_, cum)| u < *cum)
            .or_else(|| row.last())
            .map(|(t, _)| *t)
            .expect("validated rows are non-empty")
    }

    /// Samples from `start` until `stop` holds for the path so far or the
    /// path holds `horizon` states.
    pub fn sample_path<R, F>(&self, start: StateId, rng: &mut R, horizon: usize, mut stop: F) -> Vec<StateId>
    where
        R: Rng,
        F: FnMut(&[StateId]) -> bool,
    {
        let mut path = vec![start];
        while path.len() < horizon && !stop(&path) {
            let next = self.step(*path.last().expect("non-empty"), rng);
            path.push(next);
        }
        path
    }
}

/// Draws path `index` of a run seeded with `seed`.
pub fn sample_path<S, F>(
    chain: &MarkovChain<S>,
    start: StateId,
    seed: u64,
    index: u64,
    horizon: usize,
    stop: F,
) -> Result<PathSample>
where
    S: Scalar,
    F: FnMut(&[StateId]) -> bool,
{
    chain.check(start)?;
    let mut rng = path_rng(seed, index);
    let states = Sampler::new(chain).sample_path(start, &mut rng, horizon.max(1), stop);
    Ok(PathSample { states, seed, index })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Hit,
    Miss,
    Censored,
}

fn until_outcome<R: Rng>(
    sampler: &Sampler,
    query: &UntilQuery,
    hopeless: &[bool],
    max_steps: usize,
    rng: &mut R,
) -> Outcome {
    let mut s = query.start;
    for step in 0..=max_steps {
        if query.psi.contains(&s) {
            return Outcome::Hit;
        }
        if hopeless[s.0] {
            return Outcome::Miss;
        }
        if step == max_steps {
            break;
        }
        s = sampler.step(s, rng);
    }
    Outcome::Censored
}

/// Fraction of sampled paths `start·ω` in `until Φ Ψ`, censored paths
/// excluded from the decided set.
///
/// A path is decided negatively as soon as it leaves `Φ` or enters a state
/// from which the until probability is zero by the graph criterion, so
/// absorbing states outside `Ψ` do not censor.
pub fn estimate_until<S: Scalar>(
    chain: &MarkovChain<S>,
    query: &UntilQuery,
    cfg: &SimConfig,
) -> Result<Estimate> {
    query.check(chain)?;
    let sampler = Sampler::new(chain);
    let hopeless = chain
        .states()
        .map(|s| until_prob_is_zero(chain, &UntilQuery { start: s, ..query.clone() }))
        .collect::<Result<Vec<bool>>>()?;
    let (hits, censored) = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = path_rng(cfg.seed, k);
            match until_outcome(&sampler, query, &hopeless, cfg.max_steps, &mut rng) {
                Outcome::Hit => (1u64, 0u64),
                Outcome::Miss => (0, 0),
                Outcome::Censored => (0, 1),
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let decided = cfg.samples - censored;
    if decided == 0 {
        return Err(Error::NoDecidedSamples);
    }
    let mean = hits as f64 / decided as f64;
    let std_error = (mean * (1.0 - mean) / decided as f64).sqrt();
    Ok(Estimate { mean, std_error, samples_used: cfg.samples, censored })
}

/// Sample mean of the cost accumulated on `start·ω` before `phi` is first
/// visited. Paths that miss `phi` within the horizon are censored.
pub fn estimate_cost<S: Scalar>(
    rchain: &RewardChain<S>,
    phi: &StateSet,
    start: StateId,
    cfg: &SimConfig,
) -> Result<Estimate> {
    let chain = rchain.chain();
    chain.check(start)?;
    chain.check_set(phi)?;
    let sampler = Sampler::new(chain);
    let costs: Vec<Vec<(StateId, f64)>> = chain
        .states()
        .map(|s| rchain.cost_row(s).iter().map(|(t, c)| (*t, c.to_f64())).collect())
        .collect();
    let cost_of = |s: StateId, t: StateId| {
        costs[s.0]
            .binary_search_by_key(&t, |(c, _)| *c)
            .map(|i| costs[s.0][i].1)
            .unwrap_or(0.0)
    };

    // Collected in path order so the float sum does not depend on scheduling.
    let per_path: Vec<Option<f64>> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = path_rng(cfg.seed, k);
            let mut s = start;
            let mut total = 0.0;
            for step in 0..=cfg.max_steps {
                if phi.contains(&s) {
                    return Some(total);
                }
                if step == cfg.max_steps {
                    break;
                }
                let t = sampler.step(s, &mut rng);
                total += cost_of(s, t);
                s = t;
            }
            None
        })
        .collect();

    let decided: Vec<f64> = per_path.iter().flatten().copied().collect();
    let censored = cfg.samples - decided.len() as u64;
    if decided.is_empty() {
        return Err(Error::NoDecidedSamples);
    }
    let n = decided.len() as f64;
    let mean = decided.iter().sum::<f64>() / n;
    let var = if decided.len() > 1 {
        decided.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(Estimate { mean, std_error: (var / n).sqrt(), samples_used: cfg.samples, censored })
}

/// Empirical counts of `(first-jondo, last-ncoll)` over sampled Crowds
/// routes that hit a collaborator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JointCounts {
    pub counts: BTreeMap<(String, String), u64>,
    /// Routes that hit a collaborator.
    pub hits: u64,
    pub samples: u64,
    /// Routes that did not reach `End` within the horizon.
    pub censored: u64,
    /// Routes violating the `Start, Init, Mix…, End, End…` shape.
    pub shape_violations: u64,
}

impl JointCounts {
    /// No route hit a collaborator, so the counts carry no information.
    pub fn is_empty(&self) -> bool {
        self.hits == 0
    }

    pub fn frequency(&self, first: &str, last: &str) -> f64 {
        if self.hits == 0 {
            return 0.0;
        }
        let c = self.counts.get(&(first.to_string(), last.to_string())).copied().unwrap_or(0);
        c as f64 / self.hits as f64
    }

    fn merge(mut self, other: JointCounts) -> JointCounts {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.hits += other.hits;
        self.samples += other.samples;
        self.censored += other.censored;
        self.shape_violations += other.shape_violations;
        self
    }
}

/// Steps sampled past the first `End` to check that it is absorbing.
const END_TAIL: usize = 2;

pub fn estimate_joint_first_last<S: Scalar>(crowds: &Crowds<S>, cfg: &SimConfig) -> Result<JointCounts> {
    let chain = crowds.chain();
    let sampler = Sampler::new(chain);
    let end = crowds.end();
    let horizon = cfg.max_steps + 1;

    let counts = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = path_rng(cfg.seed, k);
            let mut seen_end: Option<usize> = None;
            let path = sampler.sample_path(crowds.start(), &mut rng, horizon + END_TAIL, |p| {
                let i = p.len() - 1;
                if seen_end.is_none() && p[i] == end {
                    seen_end = Some(i);
                }
                seen_end.is_some_and(|e| i >= e + END_TAIL) || (seen_end.is_none() && p.len() >= horizon)
            });
            let mut out = JointCounts { samples: 1, ..JointCounts::default() };
            match route_summary(crowds, &path) {
                None if seen_end.is_none() => out.censored = 1,
                None => out.shape_violations = 1,
                Some(route) => {
                    if let Some(last_ncoll) = route.last_ncoll {
                        out.hits = 1;
                        out.counts.insert((route.first_jondo, last_ncoll), 1);
                    }
                }
            }
            out
        })
        .reduce(JointCounts::default, JointCounts::merge);
    Ok(counts)
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
    fn deterministic_paths() {
        let c = line();
        let (a, b, cc) = (StateId(0), StateId(1), StateId(2));
        let p = sample_path(&c, a, 7, 0, 3, |_| false).unwrap();
        assert_eq!(p.states, vec![a, b, cc]);
        let p = sample_path(&c, cc, 7, 0, 5, |_| false).unwrap();
        assert_eq!(p.states, vec![cc; 5]);
        let p = sample_path(&c, a, 7, 0, 10, |p| p.last() == Some(&b)).unwrap();
        assert_eq!(p.states, vec![a, b]);
    }

    #[test]
    fn config_rejects_zero() {
        assert!(SimConfig::new(1, 0, 10).is_err());
        assert!(SimConfig::new(1, 10, 0).is_err());
    }

    #[test]
    fn until_trivial_cases() {
        let c = line();
        let cfg = SimConfig::new(3, 100, 10).unwrap();
        let a = c.state("a").unwrap();
        let q = UntilQuery::new(StateSet::new(), StateSet::from([a]), a);
        let e = estimate_until(&c, &q, &cfg).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
        // Φ = ∅ and start ∉ Ψ: the path fails at index 0.
        let q = UntilQuery::new(StateSet::new(), c.state_set(["b"]).unwrap(), a);
        assert_eq!(estimate_until(&c, &q, &cfg).unwrap().mean, 0.0);
    }

    #[test]
    fn censoring_is_reported() {
        let c = line();
        let cfg = SimConfig::new(3, 50, 1).unwrap();
        let q = UntilQuery::from_labels(&c, &["a", "b", "c"], &["c"], "a").unwrap();
        assert_eq!(estimate_until(&c, &q, &cfg), Err(Error::NoDecidedSamples));
        let cfg = SimConfig::new(3, 50, 2).unwrap();
        let e = estimate_until(&c, &q, &cfg).unwrap();
        assert_eq!((e.mean, e.censored), (1.0, 0));
    }

    #[test]
    fn unit_cost_single_edge() {
        let c = MarkovChain::validate(
            ["a", "b"],
            vec![Entry::new("a", "b", r(1, 1)), Entry::new("b", "b", r(1, 1))],
        )
        .unwrap();
        let rc = RewardChain::validate(c, vec![Entry::new("a", "b", r(1, 1))]).unwrap();
        let (a, b) = (StateId(0), StateId(1));
        let cfg = SimConfig::new(11, 1000, 10).unwrap();
        let e = estimate_cost(&rc, &StateSet::from([b]), a, &cfg).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
        let e = estimate_cost(&rc, &StateSet::from([a]), a, &cfg).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn streams_differ_by_index_and_seed() {
        let x: u64 = path_rng(1, 0).random();
        let y: u64 = path_rng(1, 1).random();
        let z: u64 = path_rng(2, 0).random();
        assert!(x != y && x != z && y != z);
        let again: u64 = path_rng(1, 0).random();
        assert_eq!(x, again);
    }
}
