//! Deterministic simulator for social-network friend-recommendation lists,
//! with the tooling to read collected sample forms and compare simulated
//! lists against them.
//!
//! The pipeline per page visit is: draw a candidate pool (carrying over
//! part of the previous list), grade each candidate by a normalized linear
//! combination of friend-of-a-friend, interestingness, attribute match and
//! the known flag, sort and threshold, inject positional trends such as
//! known candidates in the top slots, and decorate the entries for display.
//!
//! Scoring is generic over [`Scalar`] (`f32`/`f64`); the simulation runs on
//! `f64` and the aliases below name the concrete types it uses.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod features;
pub mod graph;
pub mod pipeline;
pub mod scalar;
pub mod samples;
pub mod scoring;

pub use error::{Error, Result};
pub use graph::{AttributeKey, DegreeClass, Member, MemberId, SocialGraph};
pub use scalar::Scalar;

/// Grade of a candidate in a recommendation list.
pub type Grade = f64;

pub type ScoreWeightsF64 = scoring::ScoreWeights<f64>;
pub type ScoreWeightsF32 = scoring::ScoreWeights<f32>;
pub type InterestParamsF64 = scoring::InterestParams<f64>;
pub type InterestParamsF32 = scoring::InterestParams<f32>;
pub type CandidateFeaturesF64 = features::CandidateFeatures<f64>;
pub type CandidateFeaturesF32 = features::CandidateFeatures<f32>;
pub type HistogramF64 = analysis::Histogram;
pub type DistributionComparisonF64 = analysis::DistributionComparison<f64>;
