//! Newline-delimited JSON tag feed.
//!
//! One object per line:
//! `{"tag":"A1","t":12.5,"x":30.0,"y":15.0,"unit":"ft","q":0.9}`.
//! `unit` defaults to feet and `q` is optional.

use std::collections::HashMap;

use serde_json::value::RawValue;

use super::{FrameBatch, IngestError};
use crate::model::{LengthUnit, TagSample, Vec2};

fn field<'a>(
    obj: &'a HashMap<String, &'a RawValue>,
    name: &'static str,
) -> Result<&'a str, IngestError> {
    obj.get(name)
        .map(|v| v.get())
        .ok_or(IngestError::MissingField(name))
}

// Numbers are read through the raw token so that overflowing literals such
// as 1e400 surface as non-finite coordinates rather than JSON errors.
fn number(obj: &HashMap<String, &RawValue>, name: &'static str) -> Result<f64, IngestError> {
    let raw = field(obj, name)?;
    if !raw.starts_with(|c: char| c == '-' || c.is_ascii_digit()) {
        return Err(IngestError::MalformedJson(format!(
            "`{name}` must be a number"
        )));
    }
    raw.parse::<f64>()
        .map_err(|e| IngestError::MalformedJson(format!("`{name}`: {e}")))
}

fn string(obj: &HashMap<String, &RawValue>, name: &'static str) -> Result<String, IngestError> {
    serde_json::from_str::<String>(field(obj, name)?)
        .map_err(|_| IngestError::MalformedJson(format!("`{name}` must be a string")))
}

/// Parses one feed line into a sample in yards.
pub fn parse_feed_line(line: &str) -> Result<TagSample, IngestError> {
    let obj: HashMap<String, &RawValue> =
        serde_json::from_str(line.trim()).map_err(|e| IngestError::MalformedJson(e.to_string()))?;

    let tag = string(&obj, "tag")?;
    let t = number(&obj, "t")?;
    let x = number(&obj, "x")?;
    let y = number(&obj, "y")?;
    let unit = match obj.get("unit") {
        None => LengthUnit::Feet,
        Some(_) => {
            let u = string(&obj, "unit")?;
            LengthUnit::parse(&u).ok_or(IngestError::BadUnit(u))?
        }
    };
    let quality = match obj.get("q").map(|v| v.get()) {
        None | Some("null") => None,
        Some(_) => Some(number(&obj, "q")?)
            .filter(|q| q.is_finite())
            .map(|q| q.clamp(0.0, 1.0)),
    };

    if !x.is_finite() {
        return Err(IngestError::NonFiniteCoordinate("x"));
    }
    if !y.is_finite() {
        return Err(IngestError::NonFiniteCoordinate("y"));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(IngestError::BadTimestamp(t));
    }
    let pos = Vec2::new(unit.to_yards(x), unit.to_yards(y));
    if !pos.is_finite() {
        return Err(IngestError::NonFiniteCoordinate("x"));
    }
    Ok(TagSample {
        tag_id: tag,
        t,
        pos,
        quality,
    })
}

/// Serializes a sample as a feed line (yards, no trailing newline).
///
/// Numbers use the shortest round-trip representation, so
/// `parse_feed_line(&format_feed_line(s)) == s` for every valid sample.
pub fn format_feed_line(s: &TagSample) -> String {
    let json = |v: f64| serde_json::to_string(&v).unwrap_or_else(|_| "null".into());
    let tag = serde_json::to_string(&s.tag_id).expect("strings always serialize");
    let mut line = format!(
        r#"{{"tag":{tag},"t":{},"x":{},"y":{},"unit":"{}""#,
        json(s.t),
        json(s.pos.x),
        json(s.pos.y),
        LengthUnit::Yards.as_str()
    );
    if let Some(q) = s.quality {
        line.push_str(&format!(r#","q":{}"#, json(q)));
    }
    line.push('}');
    line
}

/// Groups a time-ordered sample stream into frames.
///
/// A sample belongs to frame `round((t - origin) / dt)`, where the origin is
/// the first sample's timestamp unless set explicitly. A frame closes when a
/// sample for a later frame arrives or when the caller calls [`close`]
/// (frame timeout or end of stream). Samples for frames that are already
/// closed are counted as late and discarded.
///
/// [`close`]: FrameAssembler::close
#[derive(Debug)]
pub struct FrameAssembler {
    dt: f64,
    origin: Option<f64>,
    open: Option<FrameBatch>,
    last_closed: Option<i64>,
    late: u64,
    duplicates: u64,
}

impl FrameAssembler {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            origin: None,
            open: None,
            last_closed: None,
            late: 0,
            duplicates: 0,
        }
    }

    pub fn with_origin(mut self, t0: f64) -> Self {
        self.origin = Some(t0);
        self
    }

    pub fn frame_of(&self, t: f64) -> Option<i64> {
        self.origin.map(|t0| ((t - t0) / self.dt).round() as i64)
    }

    /// Adds a sample, returning the frame it closed, if any.
    pub fn push(&mut self, sample: TagSample) -> Option<FrameBatch> {
        let t0 = *self.origin.get_or_insert(sample.t);
        let frame = ((sample.t - t0) / self.dt).round() as i64;
        if self.last_closed.is_some_and(|c| frame <= c) {
            self.late += 1;
            return None;
        }
        let mut closed = None;
        if self.open.as_ref().is_some_and(|b| b.frame < frame) {
            closed = self.close();
        }
        let batch = self
            .open
            .get_or_insert_with(|| FrameBatch::empty(frame, t0 + frame as f64 * self.dt));
        if batch.frame > frame {
            // older than the open frame but newer than the last closed one
            self.late += 1;
            return closed;
        }
        if let Some(slot) = batch.samples.iter_mut().find(|s| s.tag_id == sample.tag_id) {
            self.duplicates += 1;
            *slot = sample;
        } else {
            batch.samples.push(sample);
        }
        closed
    }

    /// Closes the open frame, if any.
    pub fn close(&mut self) -> Option<FrameBatch> {
        let b = self.open.take()?;
        self.last_closed = Some(b.frame);
        Some(b)
    }

    pub fn has_open_frame(&self) -> bool {
        self.open.is_some()
    }

    pub fn late_samples(&self) -> u64 {
        self.late
    }

    pub fn duplicate_samples(&self) -> u64 {
        self.duplicates
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converts_feet() {
        let s = parse_feed_line(r#"{"tag":"A1","t":12.5,"x":30.0,"y":15.0,"unit":"ft"}"#).unwrap();
        assert_eq!(s.tag_id, "A1");
        assert_eq!(s.t, 12.5);
        assert_eq!(s.pos, Vec2::new(10.0, 5.0));
        assert_eq!(s.quality, None);
        let d = parse_feed_line(r#"{"tag":"A1","t":1,"x":3,"y":6}"#).unwrap();
        assert_eq!(d.pos, Vec2::new(1.0, 2.0));
    }

    #[test]
    fn overflow_is_non_finite() {
        let e = parse_feed_line(r#"{"tag":"A1","t":1.0,"x":1e400,"y":0}"#).unwrap_err();
        assert!(matches!(e, IngestError::NonFiniteCoordinate("x")));
    }

    #[test]
    fn missing_tag() {
        let e = parse_feed_line(r#"{"t":1.0,"x":0,"y":0}"#).unwrap_err();
        assert!(matches!(e, IngestError::MissingField("tag")));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            parse_feed_line("{not json"),
            Err(IngestError::MalformedJson(_))
        ));
        assert!(matches!(
            parse_feed_line(r#"{"tag":"a","t":"soon","x":0,"y":0}"#),
            Err(IngestError::MalformedJson(_))
        ));
        assert!(matches!(
            parse_feed_line(r#"{"tag":"a","t":-1,"x":0,"y":0}"#),
            Err(IngestError::BadTimestamp(_))
        ));
        assert!(matches!(
            parse_feed_line(r#"{"tag":"a","t":1,"x":0,"y":0,"unit":"m"}"#),
            Err(IngestError::BadUnit(_))
        ));
    }

    #[test]
    fn quality_is_clamped() {
        let s = parse_feed_line(r#"{"tag":"a","t":0,"x":0,"y":0,"q":1.7}"#).unwrap();
        assert_eq!(s.quality, Some(1.0));
        let s = parse_feed_line(r#"{"tag":"a","t":0,"x":0,"y":0,"q":-2}"#).unwrap();
        assert_eq!(s.quality, Some(0.0));
    }

    #[test]
    fn canonical_line() {
        let s = TagSample::new("A/L", 2.3, Vec2::new(10.0, 5.25));
        assert_eq!(
            format_feed_line(&s),
            r#"{"tag":"A/L","t":2.3,"x":10.0,"y":5.25,"unit":"yd"}"#
        );
    }

    #[test]
    fn assembles_frames() {
        let mut asm = FrameAssembler::new(0.1);
        let s = |tag: &str, t: f64| TagSample::new(tag, t, Vec2::ZERO);
        assert!(asm.push(s("a", 5.0)).is_none());
        assert!(asm.push(s("b", 5.01)).is_none());
        let f0 = asm.push(s("a", 5.1)).unwrap();
        assert_eq!(f0.frame, 0);
        assert_eq!(f0.samples.len(), 2);
        // frame 0 is closed now
        assert!(asm.push(s("b", 5.0)).is_none());
        assert_eq!(asm.late_samples(), 1);
        asm.push(s("a", 5.1));
        assert_eq!(asm.duplicate_samples(), 1);
        let f3 = asm.push(s("a", 5.3)).unwrap();
        assert_eq!(f3.frame, 1);
        let last = asm.close().unwrap();
        assert_eq!(last.frame, 3);
        assert!((last.t - 5.3).abs() < 1e-12);
        assert!(asm.close().is_none());
    }
}
