//! Per-player state from per-tag samples.
//!
//! Each tag keeps its last three samples. The weighted average of those
//! samples is a position estimate that lags the newest sample; it is paired
//! with the matching weighted-average timestamp so that velocity can be taken
//! as a finite difference over the true elapsed time and the position can be
//! carried forward to the frame time. For exactly linear motion both steps
//! are exact, whatever the gaps between samples.

use std::collections::VecDeque;

use thiserror::Error;

use crate::config::{Estimator, PredictorConfig, SmoothingOrder};
use crate::ingest::{FrameBatch, Roster};
use crate::model::{PlayerId, PlayerState, TagSample, Vec2};

/// Below this speed the motion direction is too noisy to use as orientation.
pub const ORIENTATION_SPEED_GATE: f64 = 0.5;

/// Tags closer than this are treated as coincident.
const MIN_TAG_SEPARATION: f64 = 1e-6;

const RING: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackingError {
    #[error("tag history is empty")]
    EmptyHistory,
    #[error("no tag positions to fuse")]
    NoTags,
    #[error("time step must be positive")]
    ZeroDt,
}

/// The last three accepted samples of one tag, newest first.
#[derive(Debug, Clone, PartialEq)]
pub struct TagHistory {
    tag_id: String,
    ring: VecDeque<(f64, Vec2)>,
}

/// A smoothed position together with the time it actually describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothed {
    pub pos: Vec2,
    pub t: f64,
}

impl TagHistory {
    pub fn new(tag_id: impl Into<String>) -> Self {
        Self {
            tag_id: tag_id.into(),
            ring: VecDeque::with_capacity(RING),
        }
    }

    pub fn tag_id(&self) -> &str {
        &self.tag_id
    }

    /// Accepts a sample if it is newer than everything in the ring.
    pub fn push(&mut self, t: f64, pos: Vec2) -> bool {
        if self.ring.front().is_some_and(|(newest, _)| t <= *newest) {
            return false;
        }
        if self.ring.len() == RING {
            self.ring.pop_back();
        }
        self.ring.push_front((t, pos));
        true
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn newest_time(&self) -> Option<f64> {
        self.ring.front().map(|(t, _)| *t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Vec2)> + '_ {
        self.ring.iter().copied()
    }

    /// Weighted average of the ring and the matching weighted timestamp.
    pub fn smoothed(&self, weights: &[f64; 3]) -> Result<Smoothed, TrackingError> {
        if self.ring.is_empty() {
            return Err(TrackingError::EmptyHistory);
        }
        let n = self.ring.len();
        let total: f64 = weights[..n].iter().sum();
        let w = |i: usize| {
            if total > 0.0 {
                weights[i] / total
            } else {
                1.0 / n as f64
            }
        };
        let mut pos = Vec2::ZERO;
        let mut t = 0.0;
        for (i, (ti, pi)) in self.ring.iter().enumerate() {
            pos = pos + *pi * w(i);
            t += ti * w(i);
        }
        Ok(Smoothed { pos, t })
    }
}

/// Weighted average of the samples in `h`, newest first, with the weights
/// renormalized over however many samples are present.
pub fn smooth_tag(h: &TagHistory, weights: &[f64; 3]) -> Result<Vec2, TrackingError> {
    h.smoothed(weights).map(|s| s.pos)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fused {
    pub pos: Vec2,
    /// Unit vector between the two shoulder tags, sign-normalized so that it
    /// points toward +x (or +y when vertical).
    pub shoulder_axis: Option<Vec2>,
}

/// Midpoint of one or two tag positions plus the shoulder axis.
pub fn fuse_player(tags: &[Vec2]) -> Result<Fused, TrackingError> {
    match *tags {
        [] => Err(TrackingError::NoTags),
        [p] => Ok(Fused {
            pos: p,
            shoulder_axis: None,
        }),
        [a, b, ..] => {
            let d = b - a;
            let len = d.norm();
            let shoulder_axis = (len > MIN_TAG_SEPARATION).then(|| {
                let u = d / len;
                if u.x < 0.0 || (u.x == 0.0 && u.y < 0.0) {
                    -u
                } else {
                    u
                }
            });
            Ok(Fused {
                pos: (a + b) * 0.5,
                shoulder_axis,
            })
        }
    }
}

/// Finite-difference velocity between `prev` and `pos_now`, one frame of
/// `dt` later. A stale `prev` widens the interval to `staleness + 1` frames.
pub fn estimate_velocity(prev: &PlayerState, pos_now: Vec2, dt: f64) -> Result<Vec2, TrackingError> {
    if !(dt > 0.0) {
        return Err(TrackingError::ZeroDt);
    }
    let elapsed = dt * f64::from(prev.staleness + 1);
    Ok((pos_now - prev.pos) / elapsed)
}

/// Position after `dt` seconds at constant velocity.
pub fn extrapolate(state: &PlayerState, dt: f64) -> Vec2 {
    state.pos + state.vel * dt
}

/// Estimator state for one player.
#[derive(Debug, Clone)]
pub struct TrackState {
    player: PlayerId,
    tags: Vec<TagHistory>,
    /// Ring of fused raw positions, used when fusing before smoothing.
    fused_ring: TagHistory,
    /// Last smoothed, fused position and the time it describes.
    anchor: Option<Smoothed>,
    last: Option<PlayerState>,
    last_fresh_frame: i64,
}

impl TrackState {
    pub fn new(player: PlayerId, tag_ids: &[String]) -> Self {
        Self {
            tags: tag_ids.iter().map(TagHistory::new).collect(),
            fused_ring: TagHistory::new(player.as_str()),
            player,
            anchor: None,
            last: None,
            last_fresh_frame: 0,
        }
    }

    pub fn player(&self) -> &PlayerId {
        &self.player
    }

    pub fn last(&self) -> Option<&PlayerState> {
        self.last.as_ref()
    }

    pub fn last_fused(&self) -> Option<Vec2> {
        self.anchor.map(|a| a.pos)
    }

    /// Advances this player to `frame`.
    ///
    /// Returns `None` only while the player has never been observed. Samples
    /// whose tag does not belong to the player, or whose timestamp is not newer
    /// than that tag's history, are ignored.
    pub fn advance(
        &mut self,
        frame: i64,
        t: f64,
        samples: &[&TagSample],
        given_velocity: Option<Vec2>,
        cfg: &PredictorConfig,
    ) -> Option<PlayerState> {
        let mut fresh: Vec<&TagSample> = Vec::with_capacity(samples.len());
        for s in samples {
            if let Some(h) = self.tags.iter_mut().find(|h| h.tag_id == s.tag_id) {
                if h.push(s.t, s.pos) {
                    fresh.push(s);
                }
            }
        }

        if fresh.is_empty() {
            let last = self.last.as_mut()?;
            last.frame = frame;
            last.t = t;
            last.staleness = u32::try_from(frame - self.last_fresh_frame).unwrap_or(u32::MAX);
            return Some(last.clone());
        }

        let (smoothed, axis) = match cfg.smoothing_order {
            SmoothingOrder::SmoothThenFuse => self.smooth_then_fuse(t, cfg),
            SmoothingOrder::FuseThenSmooth => self.fuse_then_smooth(&fresh, cfg),
        };

        let differenced = self.anchor.and_then(|a| {
            let elapsed = smoothed.t - a.t;
            (elapsed > 1e-9).then(|| (smoothed.pos - a.pos) / elapsed)
        });
        let held = self.last.as_ref().map(|s| s.vel);
        let vel = match (cfg.estimator, given_velocity) {
            (Estimator::GivenVelocity, Some(v)) => v,
            _ => differenced.or(held).unwrap_or(Vec2::ZERO),
        };
        let pos = smoothed.pos + vel * (t - smoothed.t);

        let previous_orientation = self.last.as_ref().and_then(|s| s.orientation);
        let orientation = if vel.norm() > ORIENTATION_SPEED_GATE {
            Some(vel.heading())
        } else if let Some(axis) = axis {
            Some(facing_from_axis(axis, previous_orientation))
        } else {
            previous_orientation
        };

        self.anchor = Some(smoothed);
        self.last_fresh_frame = frame;
        let state = PlayerState {
            player: self.player.clone(),
            frame,
            t,
            pos,
            vel,
            orientation,
            staleness: 0,
        };
        self.last = Some(state.clone());
        Some(state)
    }

    fn smooth_then_fuse(&self, t: f64, cfg: &PredictorConfig) -> (Smoothed, Option<Vec2>) {
        let horizon = cfg.sample_dt * (f64::from(cfg.max_staleness) + 0.5);
        let per_tag: Vec<Smoothed> = self
            .tags
            .iter()
            .filter(|h| h.newest_time().is_some_and(|nt| t - nt <= horizon))
            .filter_map(|h| h.smoothed(&cfg.smoothing_weights).ok())
            .collect();
        let points: Vec<Vec2> = per_tag.iter().map(|s| s.pos).collect();
        let fused = fuse_player(&points).expect("a fresh sample was just pushed");
        let mean_t = per_tag.iter().map(|s| s.t).sum::<f64>() / per_tag.len() as f64;
        (
            Smoothed {
                pos: fused.pos,
                t: mean_t,
            },
            fused.shoulder_axis,
        )
    }

    fn fuse_then_smooth(&mut self, fresh: &[&TagSample], cfg: &PredictorConfig) -> (Smoothed, Option<Vec2>) {
        let points: Vec<Vec2> = fresh.iter().map(|s| s.pos).collect();
        let fused = fuse_player(&points).expect("fresh is non-empty");
        let mean_t = fresh.iter().map(|s| s.t).sum::<f64>() / fresh.len() as f64;
        self.fused_ring.push(mean_t, fused.pos);
        let smoothed = self
            .fused_ring
            .smoothed(&cfg.smoothing_weights)
            .expect("ring holds the sample just pushed");
        (smoothed, fused.shoulder_axis)
    }
}

// The shoulder axis only fixes facing up to a half turn; keep whichever
// normal is closer to the previous orientation.
fn facing_from_axis(axis: Vec2, previous: Option<f64>) -> f64 {
    let a = axis.perp().heading();
    let b = (-axis.perp()).heading();
    match previous {
        Some(p) if angle_between(b, p) < angle_between(a, p) => b,
        _ => a,
    }
}

fn angle_between(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Tracks for every rostered player, grown as the roster grows.
#[derive(Debug, Clone, Default)]
pub struct Tracker {
    tracks: Vec<TrackState>,
}

impl Tracker {
    pub fn new() -> Self {
        Self::default()
    }

    fn sync(&mut self, roster: &Roster) {
        for (i, p) in roster.players().iter().enumerate() {
            match self.tracks.get_mut(i) {
                None => self.tracks.push(TrackState::new(p.id.clone(), &p.tags)),
                Some(track) => {
                    for tag in &p.tags {
                        if !track.tags.iter().any(|h| &h.tag_id == tag) {
                            track.tags.push(TagHistory::new(tag.as_str()));
                        }
                    }
                }
            }
        }
    }

    /// Advances every track by one frame, returning one state per player
    /// that has been observed at least once, in roster order.
    pub fn advance(&mut self, batch: &FrameBatch, roster: &Roster, cfg: &PredictorConfig) -> Vec<PlayerState> {
        self.sync(roster);
        let mut per_player: Vec<Vec<&TagSample>> = vec![Vec::new(); self.tracks.len()];
        for s in &batch.samples {
            if let Some(i) = roster.index_of_tag(&s.tag_id) {
                per_player[i].push(s);
            }
        }
        self.tracks
            .iter_mut()
            .zip(per_player)
            .filter_map(|(track, samples)| {
                let given = batch.given_velocity.get(track.player()).copied();
                track.advance(batch.frame, batch.t, &samples, given, cfg)
            })
            .collect()
    }

    pub fn tracks(&self) -> &[TrackState] {
        &self.tracks
    }
}
