//! Exact analysis of finite discrete-time Markov chains and Markov reward
//! chains.
//!
//! * [`chain`]: validated chains, successor sets, path-prefix probabilities.
//! * [`analysis`]: reachability, until probabilities, almost-sure
//!   certification, expected hitting times and costs, first-entry laws.
//! * [`simulate`]: seeded Monte Carlo estimates used as an independent check.
//! * [`info`]: entropy and mutual information of finite distributions.
//! * [`zeroconf`] and [`crowds`]: the two protocol models with closed forms.
//!
//! Chains are generic over [`Scalar`]: [`Rational`] for exact results or
//! `f64` for fast sweeps.

pub mod analysis;
pub mod chain;
pub mod crowds;
pub mod error;
pub mod info;
pub mod linalg;
pub mod model;
pub mod report;
pub mod scalar;
pub mod simulate;
pub mod zeroconf;

pub use chain::{Entry, MarkovChain, RewardChain, StateId, StateSet};
pub use error::{Error, Result};
pub use scalar::{ExtScalar, Mode, Rational, Scalar};
