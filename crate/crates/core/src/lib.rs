//! Conservative kinetic wealth-exchange models.
//!
//! Agents trade in random pairs through 2×2 column-stochastic operators, so
//! every transaction conserves the pair's wealth. The crate provides the
//! operators ([`operators`]), the exchange rules built on them
//! ([`kernels`]), a seeded transaction engine ([`engine`]) with parallel
//! replica ensembles ([`ensemble`]), distribution statistics ([`stats`]) and
//! the `kinex` command-line front end ([`cli`]).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod kernels;
pub mod operators;
pub mod stats;

pub use engine::{init_population, run, step, InitialWealth, Population, Simulation, SimulationConfig, Snapshot};
pub use ensemble::{run_ensemble, run_ensemble_with, EnsembleSummary, ReplicaStats};
pub use error::{KinexError, Result};
pub use kernels::{AgentParams, KernelSpec, ParamDist};
pub use operators::{ExchangeOperator, WealthPair};
pub use stats::{DistributionSummary, SummaryOptions, TailFit, TailFitReport};
