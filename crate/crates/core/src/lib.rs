//! Behavior-function guided exploration for deep Q-learning.
//!
//! A behavior function β, fit to the replay memory, tells frequently taken
//! actions apart from rare ones. It drives three things here:
//!
//! - in-sample TD targets that only bootstrap from supported actions,
//! - a family of coverage and correction policies built from Q and β,
//! - a sliding-window bandit that picks one of those policies per episode.
//!
//! The crate also ships the environments used to exercise the method, ε-greedy
//! and εz-greedy baselines, and numerical oracles for the operator and
//! exploration properties the method relies on.

pub mod agent;
pub mod approx;
pub mod env;
pub mod meta;
pub mod parallel;
pub mod policy;
pub mod replay;
pub mod rng;
pub mod theory;

pub use agent::{AgentKind, MetricsRow, MetricsStream, TrainConfig, Trainer};
pub use approx::{ActionDistribution, BehaviorFunction, QFunction, TargetQ};
pub use env::{EnvConfig, EnvSpec, Environment, GridObservation, StepResult};
pub use policy::{ActionChoice, PolicySpec};
pub use replay::{ReplayMemory, Transition};
