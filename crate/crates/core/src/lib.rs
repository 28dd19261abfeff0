//! Scheduled curiosity-driven Deep Dyna-Q for task-oriented dialog policy learning.
//!
//! A rule-based user simulator over a movie-ticket knowledge base, a DQN dialog
//! policy, a learned world model for planning, a curiosity model for exploration,
//! curriculum schedules over goal difficulty, and an analysis harness.

pub mod agent;
pub mod analysis;
pub mod cli;
pub mod curiosity;
pub mod curriculum;
pub mod dialog;
pub mod error;
pub mod goal;
pub mod io;
pub mod kb;
pub mod nn;
pub mod ontology;
pub mod trainer;
pub mod world_model;

pub use error::{Error, Result};
