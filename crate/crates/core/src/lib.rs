//! Seeded simulation of information creation in social-semantic networks.
//!
//! Actors publish concepts and instances and annotate instances with
//! concepts. Whether an attempted activity goes ahead depends on an
//! estimated cost and reward, several of whose drivers depend on how the
//! active ranking mechanism (random, indegree, HITS or PageRank) orders the
//! published entities. Runs record how concept reuse, the quality of the most
//! used concepts, and execution rates evolve.
//!
//! Module map:
//! - [`model`]: entities, the annotation store, the derived graph
//! - [`candidates`]: pre-run candidate generation
//! - [`drivers`]: cost and reward estimates
//! - [`ranking`]: ranking mechanisms and incremental updates
//! - [`metrics`]: reuse entropy, top-concept quality, execution rates
//! - [`engine`]: the iteration loop
//! - [`experiment`]: configuration, multi-seed sweeps, aggregation

pub mod candidates;
pub mod drivers;
pub mod engine;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod ranking;

use std::fmt::Display;

use thiserror::Error;

pub use engine::{run, SimulationConfig, SimulationOutcome, Termination};
pub use ranking::Algorithm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("`{key}` = {value} is out of range (accepted: {accepted})")]
    OutOfRange {
        key: String,
        value: String,
        accepted: String,
    },
    #[error("`{key}`: cannot parse `{value}`: {reason}")]
    Invalid {
        key: String,
        value: String,
        reason: String,
    },
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

impl ConfigError {
    pub fn out_of_range(key: &str, value: impl Display, accepted: &str) -> Self {
        ConfigError::OutOfRange {
            key: key.to_string(),
            value: value.to_string(),
            accepted: accepted.to_string(),
        }
    }

    pub fn invalid(key: &str, value: &str, reason: impl Display) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error("{context}: {cause}")]
    Io {
        context: String,
        cause: std::io::Error,
    },
}

impl Error {
    pub fn io(context: impl Display, source: std::io::Error) -> Self {
        Error::Io {
            context: context.to_string(),
            cause: source,
        }
    }
}
