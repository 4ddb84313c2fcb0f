//! Experiment runner for the behavior-guided DQN lab: configuration, seed
//! sweeps, aggregate reports, the operator check suite and the CliffWalk
//! study.

pub mod config;
pub mod output;
pub mod report;
pub mod run;
pub mod theory_suite;
pub mod toy;
