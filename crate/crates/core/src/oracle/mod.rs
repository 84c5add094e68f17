//! Brute-force optima, ground-truth distributions and regret.

mod adversary;
mod distribution;
mod fneg;
mod iia;
mod mfas;
mod regret;

pub use adversary::{cycle_instance, lower_bound_adversary, AdversaryCase, AdversaryOutcome};
pub use distribution::{mu_of, optimal_pref, pair_cost, GroundTruthDistribution, PairMarginal};
pub use fneg::{f_negativity_sample, f_value, polytope_vertices, FReport, TripleMu};
pub use iia::{check_pairwise_iia, IiaReport, IiaViolation};
pub use mfas::{min_ranking_cost, optimal_ranking, BruteForceConfig};
pub use regret::{
    regret_class, regret_prime_class, regret_prime_rank, regret_rank, Deterministic,
    QuickSortProcedure, RankingProcedure, RegretValue,
};

use thiserror::Error;

use crate::error::CoreError;
use crate::exact::ExactError;
use crate::loss::LossError;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("n = {n} exceeds the brute-force limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("probabilities must be non-negative and sum to 1 (sum is {0})")]
    BadProbabilities(String),
    #[error("distribution support must be bipartite for this operation")]
    NotBipartite,
    #[error("operation needs a distribution over a single element set")]
    VaryingElementSets,
    #[error("pair marginal violates: {0}")]
    BadMarginal(String),
    #[error("procedure returned an invalid ranking: {0}")]
    InvalidOutput(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}
