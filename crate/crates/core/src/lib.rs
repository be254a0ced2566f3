//! Exponential random graph models.
//!
//! Simulation by dyad-toggle Metropolis–Hastings, maximum pseudolikelihood,
//! Monte Carlo maximum likelihood, exchange-algorithm posterior sampling with
//! single-site and population (parallel adaptive direction) updates, Bayesian
//! goodness-of-fit, and the chain diagnostics used to report all of them.

pub mod classical;
pub mod datasets;
pub mod diagnostics;
pub mod error;
pub mod exchange;
pub mod gof;
pub mod graph;
pub mod io;
mod linalg;
pub mod population;
pub mod rng;
pub mod sampler;
pub mod statistics;

pub use classical::{log_ratio_surface, mcmle, mple, FitResult, ImportanceSample, McmleConfig};
pub use datasets::Dataset;
pub use diagnostics::{autocorrelation, effective_sample_size, summarize, PosteriorSummary};
pub use error::{ErgmError, Result};
pub use exchange::{degeneracy_monitor, exchange_log_alpha, run_exchange, ChainOutput, ExchangeConfig, Prior};
pub use gof::{bayesian_gof, GofReport};
pub use graph::{Dyad, Geodesics, Graph};
pub use population::{ads_propose, run_population, PopulationConfig, PopulationOutput};
pub use sampler::{sample_graph, stats_trace, tnt_propose, Proposal, SamplerConfig};
pub use statistics::{
    change_stats, conditional_edge_probability, global_stats, ModelSpec, StatEvaluator,
    StatVector, Term,
};

/// Re-exported so callers can build prior and noise covariances.
pub use nalgebra::DMatrix;
