use std::time::Instant;

use crate::config::PredictorConfig;
use crate::ingest::{FrameBatch, Roster};
use crate::model::{CollisionEvent, PlayerState};
use crate::predictor::Predictor;
use crate::tracking::Tracker;

use super::stats::RunStats;

/// Tracking plus prediction, one frame at a time.
///
/// Frames must arrive in increasing order. Missing frame numbers are filled
/// with empty frames so every player advances once per frame; frames at or
/// before the last processed one are discarded.
#[derive(Debug)]
pub struct Engine {
    cfg: PredictorConfig,
    roster: Roster,
    /// Unknown tags are added to the roster instead of being dropped.
    open_roster: bool,
    tracker: Tracker,
    predictor: Predictor,
    last_frame: Option<i64>,
    last_t: f64,
    last_states: Vec<PlayerState>,
    stats: RunStats,
}

impl Engine {
    pub fn new(cfg: PredictorConfig, roster: Roster) -> Self {
        Self {
            predictor: Predictor::new(cfg.clone()),
            cfg,
            roster,
            open_roster: false,
            tracker: Tracker::new(),
            last_frame: None,
            last_t: 0.0,
            last_states: Vec::new(),
            stats: RunStats::default(),
        }
    }

    /// An engine whose roster grows from tag names (`<player>/<suffix>`).
    pub fn with_open_roster(cfg: PredictorConfig, roster: Roster) -> Self {
        Self {
            open_roster: true,
            ..Self::new(cfg, roster)
        }
    }

    pub fn process(&mut self, batch: FrameBatch) -> Vec<CollisionEvent> {
        if self.last_frame.is_some_and(|f| batch.frame <= f) {
            self.stats.dropped_inputs += batch.samples.len() as u64;
            return Vec::new();
        }
        let mut events = Vec::new();
        if let Some(last) = self.last_frame {
            for f in last + 1..batch.frame {
                let t = self.last_t + (f - last) as f64 * self.cfg.sample_dt;
                events.extend(self.process_one(&FrameBatch::empty(f, t)));
            }
        }
        events.extend(self.process_one(&batch));
        events
    }

    fn process_one(&mut self, batch: &FrameBatch) -> Vec<CollisionEvent> {
        let start = Instant::now();
        if self.open_roster {
            for s in &batch.samples {
                if self.roster.insert_inferred(&s.tag_id).is_err() {
                    self.stats.dropped_inputs += 1;
                }
            }
        }
        let states = self.tracker.advance(batch, &self.roster, &self.cfg);
        let step = self.predictor.step(&states);
        self.stats.record_frame(start.elapsed());
        self.stats.events_predicted += step.events.len() as u64;
        self.last_frame = Some(batch.frame);
        self.last_t = batch.t;
        self.last_states = states;
        step.events
    }

    pub fn last_states(&self) -> &[PlayerState] {
        &self.last_states
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut RunStats {
        &mut self.stats
    }

    pub fn into_stats(self) -> RunStats {
        self.stats
    }
}
