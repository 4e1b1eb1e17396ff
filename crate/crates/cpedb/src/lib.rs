//! Pure exploration for dueling bandits over bipartite candidate-position
//! matchings.
//!
//! A problem instance is a bipartite graph of candidates and positions plus
//! an unknown matrix of pairwise win probabilities between edges sharing a
//! position. Sampling a duel between two such edges returns a Bernoulli win.
//! The goal is to identify the best maximum matching with as few duels as
//! possible, under two optimality notions:
//!
//! - **Borda winner**: the matching with the highest average preference
//!   against the whole decision class. Identified by reducing each edge to a
//!   bandit arm whose reward is its average win probability against a
//!   uniformly sampled matching ([`borda`]).
//! - **Condorcet winner**: the matching that beats every other matching
//!   head to head. Identified by an accept/reject scheme driven by an
//!   approximate minimax oracle over constrained matching polytopes
//!   ([`condorcet`], [`oracle`]).
//!
//! The crate also ships the supporting machinery: matching oracles and
//! enumeration ([`graph`]), exact score/gap oracles ([`preference`]), an
//! almost-uniform matching sampler ([`sampler`]), a seeded duel simulator
//! ([`env`]), brute-force reference oracles ([`reference`]), and a
//! reproducible experiment harness ([`experiment`]).
//!
//! Start with the runnable programs under `examples/`, or the `explore`
//! binary for config-driven experiment runs.

pub mod borda;
pub mod condorcet;
pub mod demo;
pub mod env;
mod error;
pub mod experiment;
pub mod graph;
pub mod oracle;
pub mod preference;
pub mod reference;
pub mod sampler;

pub use error::{Error, Result};
