//! Turning recorded tracking files and live tag feeds into per-frame sample batches.

mod feed;
mod roster;
mod tracking_csv;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{PlayerId, TagSample, Vec2};

pub use feed::{format_feed_line, parse_feed_line, FrameAssembler};
pub use roster::{Player, Roster};
pub use tracking_csv::{
    direction_agreement, extract_given_velocity, parse_tracking_csv, records_to_batches,
    write_tracking_csv, FieldBounds, ParsedTracking, TrackingRecord,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no recognizable header row (need x, y and frame.id columns)")]
    MissingHeader,
    #[error("input is empty")]
    EmptyInput,
    #[error("player `{0}` is not on the roster")]
    UnknownPlayer(String),
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("coordinate `{0}` is not finite")]
    NonFiniteCoordinate(&'static str),
    #[error("timestamp must be finite and non-negative (got {0})")]
    BadTimestamp(f64),
    #[error("unknown unit `{0}` (expected ft or yd)")]
    BadUnit(String),
    #[error("roster: {0}")]
    BadRoster(String),
    #[error("unsupported feed uri `{0}`")]
    BadFeedUri(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// All tag samples belonging to one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameBatch {
    pub frame: i64,
    pub t: f64,
    /// At most one sample per tag.
    pub samples: Vec<TagSample>,
    /// Velocities supplied by the data source, keyed by player.
    pub given_velocity: BTreeMap<PlayerId, Vec2>,
}

/// Inserts empty batches for frame numbers missing between consecutive
/// batches, so that every frame in the span is present exactly once.
pub fn fill_frame_gaps(batches: Vec<FrameBatch>, sample_dt: f64) -> Vec<FrameBatch> {
    let mut out: Vec<FrameBatch> = Vec::with_capacity(batches.len());
    for b in batches {
        if let Some(prev) = out.last() {
            let (pf, pt) = (prev.frame, prev.t);
            for f in pf + 1..b.frame {
                out.push(FrameBatch::empty(f, pt + (f - pf) as f64 * sample_dt));
            }
        }
        out.push(b);
    }
    out
}

impl FrameBatch {
    pub fn empty(frame: i64, t: f64) -> Self {
        Self {
            frame,
            t,
            ..Default::default()
        }
    }
}
