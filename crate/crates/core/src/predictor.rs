//! Per-pair collision prediction.
//!
//! A pair fires when the distance one sample ahead is under the threshold and
//! smaller than the distance now. It then stays alerted until the players have
//! been more than `threshold * hysteresis_factor` apart for
//! [`RELEASE_FRAMES`] consecutive frames and at least `min_event_gap` frames
//! have passed since the fire, so one approach yields one event.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::PredictorConfig;
use crate::model::{CollisionEvent, PlayerPair, PlayerState};
use crate::tracking::extrapolate;

/// Consecutive frames above the release distance needed to close an episode.
pub const RELEASE_FRAMES: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictError {
    #[error("player `{0}` is stale")]
    StalePlayer(String),
    #[error("states are from different frames ({0} vs {1})")]
    FrameMismatch(i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Clear,
    Alerted,
}

/// Episode bookkeeping shared by prediction and ground-truth detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRule {
    pub threshold: f64,
    pub hysteresis_factor: f64,
    pub min_event_gap: u32,
}

impl From<&PredictorConfig> for EpisodeRule {
    fn from(c: &PredictorConfig) -> Self {
        Self {
            threshold: c.threshold,
            hysteresis_factor: c.hysteresis_factor,
            min_event_gap: c.min_event_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub pair: PlayerPair,
    pub phase: Phase,
    pub last_measured_distance: f64,
    pub frames_above_release: u32,
    pub fired_at: Option<i64>,
}

impl PairState {
    pub fn new(pair: PlayerPair) -> Self {
        Self {
            pair,
            phase: Phase::Clear,
            last_measured_distance: f64::INFINITY,
            frames_above_release: 0,
            fired_at: None,
        }
    }

    /// Advances the episode machine by one frame. Returns true when a new
    /// episode opens on this frame.
    pub fn advance(&mut self, frame: i64, d_now: f64, fire: bool, rule: &EpisodeRule) -> bool {
        self.last_measured_distance = d_now;
        match self.phase {
            Phase::Clear => {
                if fire {
                    self.phase = Phase::Alerted;
                    self.fired_at = Some(frame);
                    self.frames_above_release = 0;
                    return true;
                }
            }
            Phase::Alerted => {
                if d_now > rule.threshold * rule.hysteresis_factor {
                    self.frames_above_release += 1;
                } else {
                    self.frames_above_release = 0;
                }
                let open_for = self.fired_at.map_or(i64::MAX, |f| frame - f);
                if self.frames_above_release >= RELEASE_FRAMES
                    && open_for >= i64::from(rule.min_event_gap)
                {
                    self.phase = Phase::Clear;
                    self.frames_above_release = 0;
                }
            }
        }
        false
    }
}

pub fn pair_distance_now(a: &PlayerState, b: &PlayerState) -> f64 {
    a.pos.distance(b.pos)
}

/// Distance between both players after each moves `dt` at constant velocity.
pub fn pair_distance_next(a: &PlayerState, b: &PlayerState, dt: f64) -> f64 {
    extrapolate(a, dt).distance(extrapolate(b, dt))
}

/// One frame of the pair state machine.
pub fn step_pair(
    ps: &PairState,
    a: &PlayerState,
    b: &PlayerState,
    cfg: &PredictorConfig,
) -> Result<(PairState, Option<CollisionEvent>), PredictError> {
    if a.frame != b.frame {
        return Err(PredictError::FrameMismatch(a.frame, b.frame));
    }
    for p in [a, b] {
        if p.staleness > cfg.max_staleness {
            return Err(PredictError::StalePlayer(p.player.0.clone()));
        }
    }
    let d_now = pair_distance_now(a, b);
    let d_next = pair_distance_next(a, b, cfg.sample_dt);
    let fire = d_next < cfg.threshold && d_next < d_now;

    let mut next = ps.clone();
    let fired = next.advance(a.frame, d_now, fire, &EpisodeRule::from(cfg));
    let event = fired.then(|| CollisionEvent::predicted(ps.pair.clone(), a.frame, a.t, d_next));
    Ok((next, event))
}

/// Pair states keyed by pair; iteration order is the pair order.
pub type PairTable = BTreeMap<PlayerPair, PairState>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameStep {
    pub events: Vec<CollisionEvent>,
    pub pairs_evaluated: usize,
}

/// Runs [`step_pair`] over every pair of non-stale players in `players`.
///
/// Pairs involving a stale player keep their previous state. Events come out
/// sorted by pair.
pub fn step_frame(pairs: &mut PairTable, players: &[PlayerState], cfg: &PredictorConfig) -> FrameStep {
    let eligible: Vec<&PlayerState> = players
        .iter()
        .filter(|p| p.staleness <= cfg.max_staleness)
        .collect();
    let mut out = FrameStep::default();
    for (i, a) in eligible.iter().enumerate() {
        for b in &eligible[i + 1..] {
            let Ok(pair) = PlayerPair::new(a.player.clone(), b.player.clone()) else {
                continue;
            };
            let (a, b) = if pair.first() == &a.player { (*a, *b) } else { (*b, *a) };
            let state = pairs
                .entry(pair.clone())
                .or_insert_with(|| PairState::new(pair));
            if let Ok((next, event)) = step_pair(state, a, b, cfg) {
                *state = next;
                out.events.extend(event);
                out.pairs_evaluated += 1;
            }
        }
    }
    out.events.sort_by(|x, y| x.pair.cmp(&y.pair));
    out
}

/// Stateful wrapper around [`step_frame`].
#[derive(Debug, Clone, Default)]
pub struct Predictor {
    cfg: PredictorConfig,
    pairs: PairTable,
}

impl Predictor {
    pub fn new(cfg: PredictorConfig) -> Self {
        Self {
            cfg,
            pairs: PairTable::new(),
        }
    }

    pub fn step(&mut self, players: &[PlayerState]) -> FrameStep {
        step_frame(&mut self.pairs, players, &self.cfg)
    }

    pub fn pairs(&self) -> &PairTable {
        &self.pairs
    }

    pub fn config(&self) -> &PredictorConfig {
        &self.cfg
    }
}
