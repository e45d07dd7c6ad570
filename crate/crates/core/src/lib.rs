//! SABRES: an evolutionary global optimizer that combines Robbins-Monro style
//! directional updates with a Brownian-repulsion mutation, plus a CEC-style
//! benchmark suite and trial harness.

pub mod benchmarks;
pub mod cli;
pub mod engine;
pub mod error;
pub mod harness;
pub mod rng;

pub use benchmarks::{ObjectiveSpec, TransformData};
pub use engine::{RunResult, SabresConfig, Termination};
pub use error::{Error, Result};
pub use harness::{TrialResult, TrialSummary};
pub use rng::RandomStream;
