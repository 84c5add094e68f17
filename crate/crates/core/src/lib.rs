//! Ranking from binary pairwise preferences with randomized QuickSort.
//!
//! The crate turns a (possibly cyclic) tournament into a ranking, measures
//! weighted pairwise misranking losses, and carries exact oracles that
//! enumerate QuickSort's pivot choices in rational arithmetic.
//!
//! Numeric code is generic over [`Scalar`]; [`Rational`] is the exact
//! instantiation and `f64` the fast one.

pub mod bench;
pub mod element;
pub mod error;
pub mod exact;
pub mod io;
pub mod loss;
pub mod oracle;
pub mod pair;
pub mod partition;
pub mod qsrank;
pub mod ranking;
pub mod scalar;
pub mod tournament;
pub mod weight;

pub use element::{ElementId, ElementSet, PairRelation};
pub use error::CoreError;
pub use exact::{expected_loss_exact, ExactConfig};
pub use io::{load_tournament, parse_trn, write_trn, IoError};
pub use loss::{GroundTruth, LossError, LossValue, Normalizer};
pub use pair::PairTable;
pub use partition::Partition;
pub use qsrank::{quicksort_rank, quicksort_topk, QuickSort, RandomSource, RankResult};
pub use ranking::Ranking;
pub use scalar::Scalar;
pub use tournament::Tournament;
pub use weight::{WeightFunction, WeightKind};

/// Arbitrary-precision rational, the exact scalar.
pub type Rational = num_rational::BigRational;

pub type ExactWeight = WeightFunction<Rational>;
pub type FloatWeight = WeightFunction<f64>;
pub type ExactLoss = LossValue<Rational>;
pub type FloatLoss = LossValue<f64>;
pub type ExactPairTable = PairTable<Rational>;
pub type ExactDistribution = oracle::GroundTruthDistribution<Rational>;
