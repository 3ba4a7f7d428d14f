//! Shared domain types.
//!
//! Every distance in this crate is stored in yards. Feet only appear at the
//! edges (feed lines, config files, scenario files) and are converted once
//! via [`feet_to_yards`].

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::ModelError;

/// Converts a distance in feet to yards.
#[inline]
pub fn feet_to_yards(feet: f64) -> f64 {
    feet / 3.0
}

/// Distance unit accepted at input boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LengthUnit {
    #[default]
    Feet,
    Yards,
}

impl LengthUnit {
    pub fn to_yards(self, value: f64) -> f64 {
        match self {
            LengthUnit::Feet => feet_to_yards(value),
            LengthUnit::Yards => value,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "ft" | "feet" => Some(LengthUnit::Feet),
            "yd" | "yards" => Some(LengthUnit::Yards),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LengthUnit::Feet => "ft",
            LengthUnit::Yards => "yd",
        }
    }
}

/// A 2-D point or vector on the field, in yards (or yards/second for velocities).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counter-clockwise quarter turn.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Heading of this vector in the field frame, normalized to `[0, 2π)`.
    pub fn heading(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Maps any finite angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// One timestamped position reading from one tag.
#[derive(Debug, Clone, PartialEq)]
pub struct TagSample {
    pub tag_id: String,
    /// Seconds.
    pub t: f64,
    /// Yards.
    pub pos: Vec2,
    pub quality: Option<f64>,
}

impl TagSample {
    pub fn new(tag_id: impl Into<String>, t: f64, pos: Vec2) -> Self {
        Self {
            tag_id: tag_id.into(),
            t,
            pos,
            quality: None,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(ModelError::BadTimestamp(self.t));
        }
        if !self.pos.is_finite() {
            return Err(ModelError::NonFinitePosition);
        }
        if let Some(q) = self.quality {
            if !(0.0..=1.0).contains(&q) {
                return Err(ModelError::QualityOutOfRange(q));
            }
        }
        Ok(())
    }
}

/// Opaque player identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerId(pub String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId(s.to_owned())
    }
}

/// Unordered pair of distinct players, stored with the smaller id first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerPair {
    a: PlayerId,
    b: PlayerId,
}

impl PlayerPair {
    pub fn new(a: PlayerId, b: PlayerId) -> Result<Self, ModelError> {
        match a.cmp(&b) {
            Ordering::Less => Ok(Self { a, b }),
            Ordering::Greater => Ok(Self { a: b, b: a }),
            Ordering::Equal => Err(ModelError::SelfPair(a.0)),
        }
    }

    pub fn first(&self) -> &PlayerId {
        &self.a
    }

    pub fn second(&self) -> &PlayerId {
        &self.b
    }

    pub fn contains(&self, p: &PlayerId) -> bool {
        &self.a == p || &self.b == p
    }
}

impl fmt::Display for PlayerPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.a, self.b)
    }
}

/// Fused, smoothed per-player state at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerState {
    pub player: PlayerId,
    pub frame: i64,
    pub t: f64,
    pub pos: Vec2,
    pub vel: Vec2,
    /// Radians in the field frame, `[0, 2π)`.
    pub orientation: Option<f64>,
    /// Consecutive frames without a fresh sample.
    pub staleness: u32,
}

impl PlayerState {
    pub fn at_rest(player: PlayerId, frame: i64, t: f64, pos: Vec2) -> Self {
        Self {
            player,
            frame,
            t,
            pos,
            vel: Vec2::ZERO,
            orientation: None,
            staleness: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Predicted,
    Actual,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Predicted => "predicted",
            EventKind::Actual => "actual",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "predicted" => Some(EventKind::Predicted),
            "actual" => Some(EventKind::Actual),
            _ => None,
        }
    }
}

/// A predicted or ground-truth incident between two players.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionEvent {
    pub pair: PlayerPair,
    /// Frame at which the episode opens.
    pub frame: i64,
    pub t: f64,
    pub kind: EventKind,
    /// Next-step distance at the fire frame (predicted events only).
    pub min_predicted_distance: Option<f64>,
}

impl CollisionEvent {
    pub fn actual(pair: PlayerPair, frame: i64, t: f64) -> Self {
        Self {
            pair,
            frame,
            t,
            kind: EventKind::Actual,
            min_predicted_distance: None,
        }
    }

    pub fn predicted(pair: PlayerPair, frame: i64, t: f64, distance: f64) -> Self {
        Self {
            pair,
            frame,
            t,
            kind: EventKind::Predicted,
            min_predicted_distance: Some(distance),
        }
    }
}
