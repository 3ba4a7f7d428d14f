//! Player-to-player collision prediction from tag tracking data.
//!
//! Tag samples are smoothed, fused into player states, extrapolated one
//! frame ahead and checked pairwise against a distance threshold. Predicted
//! contacts become pager commands; recorded plays can be replayed and
//! scored against ground truth.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alerts;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod eventlog;
pub mod harness;
pub mod ingest;
pub mod model;
pub mod predictor;
pub mod tracking;

pub use config::{AlertConfig, Estimator, PredictorConfig, RunConfig, SmoothingOrder};
pub use error::{Error, Result};
pub use model::{CollisionEvent, EventKind, PlayerId, PlayerPair, PlayerState, TagSample, Vec2};
