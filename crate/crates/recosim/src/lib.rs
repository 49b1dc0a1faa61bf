//! Simulation library for explore/exploit recommendation on bipartite access
//! graphs.
//!
//! Users may only be shown items they are connected to in an access graph;
//! item values are unknown until an item has been presented enough times.
//! The crate provides:
//!
//! - graph construction, generators, and derived statistics ([`graph`]);
//! - reward models including adversarial placements and per-class value
//!   sequences ([`reward`]);
//! - balanced semi-matchings and greedy neighborhood partitions
//!   ([`partition`]);
//! - the recommendation policies ([`policy`]);
//! - finite-population and infinite-horizon simulators with worst-case-user
//!   competitive-ratio estimation ([`sim`]);
//! - exact combinatorial oracles used to validate the simulators
//!   ([`oracle`]);
//! - a config-driven experiment runner and the acceptance suites
//!   ([`experiment`]).
//!
//! Start from the `examples/` directory: each example is a runnable
//! walkthrough of one capability.

pub mod experiment;
pub mod graph;
pub mod oracle;
pub mod partition;
pub mod policy;
pub mod reward;
pub mod sim;
pub mod stats;

pub use graph::{AccessGraph, GraphStats};
pub use policy::{PolicySpec, Recommendation};
pub use reward::RewardModel;
