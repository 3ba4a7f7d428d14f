//! Scripted scenarios: players following piecewise-linear routes, sampled by
//! noisy, lossy tags.
//!
//! ```text
//! # two players running at each other
//! sample_dt = 0.1
//! duration = 6
//! seed = 7
//! noise = 0.17 yd      # per-tag Gaussian sigma, per axis
//! dropout = 0.1        # per-tag probability of a missing sample
//! tags = 2
//! tag_spacing = 0.5 yd
//! player.A = 0 0 0; 6 12 0      # t x y; t x y; ...
//! player.B = 0 10 0; 6 -2 0
//! ```
//!
//! Waypoint coordinates are in `units` (default `yd`). Players hold their
//! first waypoint before it and their last one after it.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::config::{key_values, parse_distance, parse_f64};
use crate::ingest::{
    format_feed_line, write_tracking_csv, FrameBatch, IngestError, Roster, TrackingRecord,
};
use crate::model::{LengthUnit, PlayerId, TagSample, Vec2};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("bad scenario: {0}")]
    BadSpec(String),
}

fn bad(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::BadSpec(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub player: PlayerId,
    /// `(t, position)` with strictly increasing `t`.
    pub waypoints: Vec<(f64, Vec2)>,
}

impl Route {
    pub fn position(&self, t: f64) -> Vec2 {
        let (first, last) = (self.waypoints[0], self.waypoints[self.waypoints.len() - 1]);
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        let w = self
            .waypoints
            .windows(2)
            .find(|w| t <= w[1].0)
            .expect("t is inside the route");
        let ((t0, p0), (t1, p1)) = (w[0], w[1]);
        p0 + (p1 - p0) * ((t - t0) / (t1 - t0))
    }

    /// Velocity on the segment containing `t` (the later one at a waypoint).
    pub fn velocity(&self, t: f64) -> Vec2 {
        self.waypoints
            .windows(2)
            .find(|w| t >= w[0].0 && t < w[1].0)
            .map_or(Vec2::ZERO, |w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sample_dt: f64,
    pub duration: f64,
    pub seed: u64,
    /// Per-tag, per-axis standard deviation in yards.
    pub noise: f64,
    pub dropout: f64,
    pub tags_per_player: usize,
    pub tag_spacing: f64,
    pub routes: Vec<Route>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            sample_dt: 0.1,
            duration: 0.0,
            seed: 0,
            noise: 0.0,
            dropout: 0.0,
            tags_per_player: 2,
            tag_spacing: 0.5,
            routes: Vec::new(),
        }
    }
}

/// Samples and roster produced from a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub roster: Roster,
    /// One batch per frame, starting at frame 0 and `t = 0`.
    pub batches: Vec<FrameBatch>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let kv = key_values(text).map_err(|e| bad(e.to_string()))?;
        let mut sc = Scenario::default();
        let unit = kv
            .iter()
            .find(|(_, k, _)| *k == "units")
            .map(|(_, _, v)| LengthUnit::parse(v).ok_or_else(|| bad(format!("unknown units `{v}`"))))
            .transpose()?
            .unwrap_or(LengthUnit::Yards);
        for (line, key, value) in kv {
            let num = |v: &str| parse_f64(v).map_err(|e| bad(format!("line {line}: {e}")));
            match key {
                "units" => {}
                "sample_dt" => sc.sample_dt = num(value)?,
                "duration" => sc.duration = num(value)?,
                "seed" => {
                    sc.seed = value
                        .parse()
                        .map_err(|_| bad(format!("line {line}: bad seed `{value}`")))?
                }
                "noise" => sc.noise = parse_distance(value).map_err(|e| bad(format!("line {line}: {e}")))?,
                "dropout" => sc.dropout = num(value)?,
                "tags" => {
                    sc.tags_per_player = value
                        .parse()
                        .map_err(|_| bad(format!("line {line}: bad tag count `{value}`")))?
                }
                "tag_spacing" => {
                    sc.tag_spacing = parse_distance(value).map_err(|e| bad(format!("line {line}: {e}")))?
                }
                k if k.starts_with("player.") => {
                    let id = &k["player.".len()..];
                    if id.is_empty() {
                        return Err(bad(format!("line {line}: empty player id")));
                    }
                    let mut waypoints = Vec::new();
                    for wp in value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                        let nums: Vec<f64> = wp.split_whitespace().map(num).collect::<Result<_, _>>()?;
                        let [t, x, y] = nums[..] else {
                            return Err(bad(format!("line {line}: waypoint `{wp}` needs `t x y`")));
                        };
                        waypoints.push((t, Vec2::new(unit.to_yards(x), unit.to_yards(y))));
                    }
                    sc.routes.push(Route {
                        player: PlayerId::new(id),
                        waypoints,
                    });
                }
                other => return Err(bad(format!("line {line}: unknown key `{other}`"))),
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, crate::error::Error> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::parse(&text)?)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.sample_dt > 0.0) {
            return Err(bad("sample_dt must be positive"));
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(bad("duration must be non-negative"));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(bad(format!("noise sigma must be non-negative (got {})", self.noise)));
        }
        if !(0.0..=1.0).contains(&self.dropout) {
            return Err(bad("dropout must be a probability"));
        }
        if !(1..=2).contains(&self.tags_per_player) {
            return Err(bad("tags must be 1 or 2"));
        }
        for (i, r) in self.routes.iter().enumerate() {
            if r.waypoints.is_empty() {
                return Err(bad(format!("player `{}` has no waypoints", r.player)));
            }
            if r.waypoints.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(bad(format!("player `{}` has overlapping waypoint times", r.player)));
            }
            if self.routes[..i].iter().any(|o| o.player == r.player) {
                return Err(bad(format!("player `{}` is defined twice", r.player)));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_noise(mut self, sigma: f64, dropout: f64) -> Self {
        self.noise = sigma;
        self.dropout = dropout;
        self
    }

    pub fn frame_count(&self) -> usize {
        (self.duration / self.sample_dt).round() as usize + 1
    }

    pub fn frame_time(&self, frame: usize) -> f64 {
        frame as f64 * self.sample_dt
    }

    pub fn tag_ids(&self, route: &Route) -> Vec<String> {
        match self.tags_per_player {
            1 => vec![route.player.0.clone()],
            _ => vec![format!("{}/L", route.player), format!("{}/R", route.player)],
        }
    }

    pub fn roster(&self) -> Roster {
        let mut r = Roster::new();
        for route in &self.routes {
            r.add(route.player.clone(), None, self.tag_ids(route), None)
                .expect("validated scenarios have unique players");
        }
        r
    }

    /// Offsets of each tag from the player's centre: across the direction
    /// of travel, or across +x when standing still.
    fn tag_offsets(&self, route: &Route, t: f64) -> Vec<Vec2> {
        if self.tags_per_player == 1 {
            return vec![Vec2::ZERO];
        }
        let v = route.velocity(t);
        let dir = if v.norm() > 0.0 { v / v.norm() } else { Vec2::new(1.0, 0.0) };
        let half = dir.perp() * (self.tag_spacing / 2.0);
        vec![half, -half]
    }

    /// Deterministic for a given seed.
    pub fn generate(&self) -> Synthesized {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, self.noise.max(0.0)).expect("sigma validated");
        let mut batches = Vec::with_capacity(self.frame_count());
        for k in 0..self.frame_count() {
            let t = self.frame_time(k);
            let mut batch = FrameBatch::empty(k as i64, t);
            for route in &self.routes {
                let centre = route.position(t);
                for (tag, offset) in self.tag_ids(route).into_iter().zip(self.tag_offsets(route, t)) {
                    let lost = rng.random::<f64>() < self.dropout;
                    let jitter = Vec2::new(normal.sample(&mut rng), normal.sample(&mut rng));
                    if !lost {
                        batch.samples.push(TagSample::new(tag, t, centre + offset + jitter));
                    }
                }
            }
            batches.push(batch);
        }
        Synthesized {
            roster: self.roster(),
            batches,
        }
    }

    /// Noise-free centre positions, one vector per frame, in route order.
    pub fn truth(&self) -> Vec<Vec<Vec2>> {
        (0..self.frame_count())
            .map(|k| self.routes.iter().map(|r| r.position(self.frame_time(k))).collect())
            .collect()
    }
}

/// One feed line per sample, frame by frame.
pub fn write_ndjson<W: Write>(batches: &[FrameBatch], mut w: W) -> std::io::Result<()> {
    for b in batches {
        for s in &b.samples {
            writeln!(w, "{}", format_feed_line(s))?;
        }
    }
    w.flush()
}

/// Tracking CSV with one row per player per frame (frame ids start at 1).
/// The row position is the mean of the player's samples in that frame;
/// speed and direction come from the scripted route.
pub fn write_scenario_csv<W: Write>(scenario: &Scenario, synth: &Synthesized, w: W) -> Result<(), IngestError> {
    let mut records = Vec::new();
    for b in &synth.batches {
        for (route, player) in scenario.routes.iter().zip(synth.roster.players()) {
            let points: Vec<Vec2> = b
                .samples
                .iter()
                .filter(|s| player.tags.contains(&s.tag_id))
                .map(|s| s.pos)
                .collect();
            if points.is_empty() {
                continue;
            }
            let pos = points.iter().fold(Vec2::ZERO, |acc, p| acc + *p) / points.len() as f64;
            let v = route.velocity(b.t);
            records.push(TrackingRecord {
                game_id: "synth".into(),
                play_id: "1".into(),
                frame_id: b.frame + 1,
                player_id: player.id.0.clone(),
                display_name: None,
                jersey: None,
                pos,
                speed: Some(v.norm()),
                dir: Some(v.x.atan2(v.y).to_degrees().rem_euclid(360.0)),
                event: None,
            });
        }
    }
    write_tracking_csv(&records, w)
}
