// Big Data Bowl tracking files: one row per player (or ball) per frame.
//
// Column names follow the 2017 release (`frame.id`, `nflId`, ...); the
// camelCase spellings of later releases are accepted as aliases.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use super::{FrameBatch, IngestError, Roster};
use crate::model::{PlayerId, TagSample, Vec2};

const NA: &str = "NA";
const BALL: &str = "ball";

const HEADER: [&str; 14] = [
    "time",
    "x",
    "y",
    "s",
    "dis",
    "dir",
    "event",
    "nflId",
    "displayName",
    "jerseyNumber",
    "team",
    "frame.id",
    "gameId",
    "playId",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRecord {
    pub game_id: String,
    pub play_id: String,
    /// 1-based.
    pub frame_id: i64,
    /// Numeric id as text, or `"ball"`.
    pub player_id: String,
    pub display_name: Option<String>,
    pub jersey: Option<String>,
    pub pos: Vec2,
    /// yd/s.
    pub speed: Option<f64>,
    /// Degrees, clockwise from the field +y axis.
    pub dir: Option<f64>,
    pub event: Option<String>,
}

/// Rows outside this box are treated as sensor glitches and skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldBounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Default for FieldBounds {
    fn default() -> Self {
        Self {
            min: Vec2::new(-10.0, -10.0),
            max: Vec2::new(130.0, 63.4),
        }
    }
}

impl FieldBounds {
    pub fn contains(&self, p: Vec2) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedTracking {
    pub records: Vec<TrackingRecord>,
    /// Data rows rejected for bad mandatory fields or out-of-bounds positions.
    pub skipped: usize,
}

struct Columns {
    x: usize,
    y: usize,
    frame: usize,
    speed: Option<usize>,
    dir: Option<usize>,
    event: Option<usize>,
    nfl_id: Option<usize>,
    name: Option<usize>,
    jersey: Option<usize>,
    game: Option<usize>,
    play: Option<usize>,
}

impl Columns {
    fn locate(header: &csv::StringRecord) -> Option<Self> {
        let find = |names: &[&str]| header.iter().position(|h| names.contains(&h.trim()));
        Some(Self {
            x: find(&["x"])?,
            y: find(&["y"])?,
            frame: find(&["frame.id", "frameId", "frame_id"])?,
            speed: find(&["s"]),
            dir: find(&["dir"]),
            event: find(&["event"]),
            nfl_id: find(&["nflId", "nfl_id"]),
            name: find(&["displayName", "display_name"]),
            jersey: find(&["jerseyNumber", "jersey_number"]),
            game: find(&["gameId", "game_id"]),
            play: find(&["playId", "play_id"]),
        })
    }
}

fn present(v: Option<&str>) -> Option<&str> {
    v.map(str::trim).filter(|s| !s.is_empty() && *s != NA)
}

fn finite(v: Option<&str>) -> Option<f64> {
    present(v)?.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Parses a tracking CSV, optionally keeping only one `(game_id, play_id)`.
///
/// Rows whose `x`, `y` or frame id cannot be parsed, or whose position lies
/// outside `bounds`, are skipped and counted rather than failing the file.
pub fn parse_tracking_csv<R: Read>(
    reader: R,
    play_filter: Option<(&str, &str)>,
    bounds: &FieldBounds,
) -> Result<ParsedTracking, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].trim().is_empty()) {
        return Err(IngestError::EmptyInput);
    }
    let cols = Columns::locate(&header).ok_or(IngestError::MissingHeader)?;

    let mut out = ParsedTracking::default();
    for row in rdr.records() {
        let row = row?;
        let text = |i: Option<usize>| present(i.and_then(|i| row.get(i))).map(String::from);
        let game_id = text(cols.game).unwrap_or_default();
        let play_id = text(cols.play).unwrap_or_default();
        if let Some((g, p)) = play_filter {
            if game_id != g || play_id != p {
                continue;
            }
        }
        let (Some(x), Some(y)) = (finite(row.get(cols.x)), finite(row.get(cols.y))) else {
            out.skipped += 1;
            continue;
        };
        let frame_id = present(row.get(cols.frame)).and_then(|s| s.parse::<i64>().ok());
        let Some(frame_id) = frame_id.filter(|f| *f >= 1) else {
            out.skipped += 1;
            continue;
        };
        let pos = Vec2::new(x, y);
        if !bounds.contains(pos) {
            out.skipped += 1;
            continue;
        }
        out.records.push(TrackingRecord {
            game_id,
            play_id,
            frame_id,
            player_id: text(cols.nfl_id).unwrap_or_else(|| BALL.to_owned()),
            display_name: text(cols.name),
            jersey: text(cols.jersey),
            pos,
            speed: finite(cols.speed.and_then(|i| row.get(i))),
            dir: finite(cols.dir.and_then(|i| row.get(i))),
            event: text(cols.event),
        });
    }
    Ok(out)
}

/// Writes records in the 2017 column layout; absent values become `NA`.
pub fn write_tracking_csv<W: Write>(records: &[TrackingRecord], writer: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| NA.to_owned());
    let num = |v: Option<f64>| v.map_or_else(|| NA.to_owned(), |x| x.to_string());
    for r in records {
        let ball = r.player_id == BALL;
        w.write_record([
            NA.to_owned(),
            r.pos.x.to_string(),
            r.pos.y.to_string(),
            num(r.speed),
            NA.to_owned(),
            num(r.dir),
            opt(&r.event),
            if ball { NA.to_owned() } else { r.player_id.clone() },
            opt(&r.display_name),
            opt(&r.jersey),
            if ball { BALL.to_owned() } else { NA.to_owned() },
            r.frame_id.to_string(),
            r.game_id.clone(),
            r.play_id.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Velocity vector from the dataset's speed and direction columns.
///
/// `dir` is measured in degrees clockwise from the field +y axis, so 90°
/// points along +x.
pub fn extract_given_velocity(r: &TrackingRecord) -> Option<Vec2> {
    let speed = r.speed?;
    let dir = r.dir?.to_radians();
    Some(Vec2::new(speed * dir.sin(), speed * dir.cos()))
}

/// Mean cosine between [`extract_given_velocity`] and the observed
/// displacement to the next frame, over every player step that moved more
/// than `min_step` yards. Values near 1 confirm the angle convention; values
/// near 0 or negative mean the convention is wrong for this file.
pub fn direction_agreement(records: &[TrackingRecord], min_step: f64) -> Option<f64> {
    let mut by_player: HashMap<&str, Vec<&TrackingRecord>> = HashMap::new();
    for r in records {
        by_player.entry(r.player_id.as_str()).or_default().push(r);
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for rows in by_player.values_mut() {
        rows.sort_by_key(|r| r.frame_id);
        for w in rows.windows(2) {
            if w[1].frame_id != w[0].frame_id + 1 {
                continue;
            }
            let step = w[1].pos - w[0].pos;
            let Some(v) = extract_given_velocity(w[0]) else { continue };
            if step.norm() < min_step || v.norm() == 0.0 {
                continue;
            }
            sum += (step.x * v.x + step.y * v.y) / (step.norm() * v.norm());
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Groups records into frame batches, one synthetic sample per mapped tag.
///
/// Returns the batches and the number of dropped records (ball rows,
/// unrostered players when `strict` is off, duplicate rows).
pub fn records_to_batches(
    records: &[TrackingRecord],
    roster: &Roster,
    sample_dt: f64,
    strict: bool,
) -> Result<(Vec<FrameBatch>, usize), IngestError> {
    let mut sorted: Vec<&TrackingRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.frame_id);

    let mut frames: BTreeMap<i64, FrameBatch> = BTreeMap::new();
    let mut dropped = 0;
    for r in sorted {
        let Some(player) = roster.get(&PlayerId::new(r.player_id.as_str())) else {
            if strict && r.player_id != BALL {
                return Err(IngestError::UnknownPlayer(r.player_id.clone()));
            }
            dropped += 1;
            continue;
        };
        let t = (r.frame_id - 1) as f64 * sample_dt;
        let batch = frames
            .entry(r.frame_id)
            .or_insert_with(|| FrameBatch::empty(r.frame_id, t));
        if batch.samples.iter().any(|s| player.tags.contains(&s.tag_id)) {
            dropped += 1;
            continue;
        }
        for tag in &player.tags {
            batch.samples.push(TagSample::new(tag.clone(), t, r.pos));
        }
        if let Some(v) = extract_given_velocity(r) {
            batch.given_velocity.insert(player.id.clone(), v);
        }
    }
    Ok((frames.into_values().collect(), dropped))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
time,x,y,s,dis,dir,event,nflId,displayName,jerseyNumber,team,frame.id,gameId,playId
2017-09-08 00:44:06.9,50.0,26.7,0.5,0.05,90,NA,2543498,Eric Fisher,72,home,1,2017090700,68
2017-09-08 00:44:06.9,NA,26.7,0.5,0.05,90,NA,2552315,Elandon Roberts,52,away,1,2017090700,68
2017-09-08 00:44:06.9,60.2,20.1,NA,NA,NA,NA,NA,football,NA,ball,1,2017090700,68
2017-09-08 00:44:07.0,50.05,26.7,0.5,0.05,90,ball_snap,2543498,Eric Fisher,72,home,2,2017090700,68
2017-09-08 00:44:07.0,50.0,26.7,0.5,0.05,90,NA,2543498,Eric Fisher,72,home,1,2017090700,99
";

    fn parse(text: &str) -> ParsedTracking {
        parse_tracking_csv(text.as_bytes(), None, &FieldBounds::default()).unwrap()
    }

    #[test]
    fn maps_big_data_bowl_columns() {
        let p = parse(SAMPLE);
        assert_eq!(p.skipped, 1);
        assert_eq!(p.records.len(), 4);
        let r = &p.records[0];
        assert_eq!(r.pos, Vec2::new(50.0, 26.7));
        assert_eq!(r.frame_id, 1);
        assert_eq!(r.player_id, "2543498");
        assert_eq!(r.display_name.as_deref(), Some("Eric Fisher"));
        assert_eq!(r.jersey.as_deref(), Some("72"));
        assert_eq!(r.speed, Some(0.5));
        assert_eq!(p.records[1].player_id, "ball");
        assert_eq!(p.records[2].event.as_deref(), Some("ball_snap"));
    }

    #[test]
    fn filters_by_play() {
        let p = parse_tracking_csv(
            SAMPLE.as_bytes(),
            Some(("2017090700", "99")),
            &FieldBounds::default(),
        )
        .unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.skipped, 0);
    }

    #[test]
    fn header_only_and_empty() {
        let p = parse("time,x,y,frame.id\n");
        assert!(p.records.is_empty());
        assert_eq!(p.skipped, 0);
        assert!(matches!(
            parse_tracking_csv("".as_bytes(), None, &FieldBounds::default()),
            Err(IngestError::EmptyInput)
        ));
        assert!(matches!(
            parse_tracking_csv("a,b,c\n1,2,3\n".as_bytes(), None, &FieldBounds::default()),
            Err(IngestError::MissingHeader)
        ));
    }

    #[test]
    fn out_of_bounds_rows_are_skipped() {
        let p = parse("x,y,frame.id,nflId\n200,20,1,7\n-9.5,63,1,8\n");
        assert_eq!(p.skipped, 1);
        assert_eq!(p.records.len(), 1);
    }

    #[test]
    fn given_velocity_convention() {
        let mut r = parse(SAMPLE).records[0].clone();
        r.speed = Some(5.0);
        r.dir = Some(90.0);
        let v = extract_given_velocity(&r).unwrap();
        assert!((v.x - 5.0).abs() < 1e-12 && v.y.abs() < 1e-12);
        r.dir = Some(0.0);
        let v = extract_given_velocity(&r).unwrap();
        assert!(v.x.abs() < 1e-12 && (v.y - 5.0).abs() < 1e-12);
        r.speed = Some(0.0);
        r.dir = Some(123.0);
        assert_eq!(extract_given_velocity(&r).unwrap().norm(), 0.0);
        r.speed = None;
        assert!(extract_given_velocity(&r).is_none());
    }

    #[test]
    fn convention_check_detects_agreement() {
        // A player moving along +x at 5 yd/s, reported with dir = 90.
        let rows: Vec<TrackingRecord> = (1..=10)
            .map(|f| TrackingRecord {
                game_id: "g".into(),
                play_id: "p".into(),
                frame_id: f,
                player_id: "1".into(),
                display_name: None,
                jersey: None,
                pos: Vec2::new(10.0 + 0.5 * f as f64, 20.0),
                speed: Some(5.0),
                dir: Some(90.0),
                event: None,
            })
            .collect();
        let agree = direction_agreement(&rows, 0.01).unwrap();
        assert!((agree - 1.0).abs() < 1e-9);
        let flipped: Vec<_> = rows
            .into_iter()
            .map(|mut r| {
                r.dir = Some(270.0);
                r
            })
            .collect();
        assert!(direction_agreement(&flipped, 0.01).unwrap() < -0.99);
    }

    #[test]
    fn batches_group_by_frame() {
        let p = parse(SAMPLE);
        let roster = Roster::single_tag(["2543498"]).unwrap();
        let (batches, dropped) = records_to_batches(&p.records, &roster, 0.1, false).unwrap();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].frame, 1);
        assert_eq!(batches[0].t, 0.0);
        assert_eq!(batches[1].t, 0.1);
        // ball, plus the duplicate frame-1 row from the other play
        assert_eq!(dropped, 2);
        assert!(batches[1].given_velocity.contains_key(&PlayerId::new("2543498")));
    }

    #[test]
    fn dual_tag_players_get_two_samples() {
        let p = parse("x,y,frame.id,nflId\n1,1,1,7\n2,2,1,8\n3,3,2,7\n4,4,2,8\n5,5,1,9\n");
        let mut roster = Roster::new();
        roster
            .add("7".into(), None, vec!["7/L".into(), "7/R".into()], None)
            .unwrap();
        roster
            .add("8".into(), None, vec!["8/L".into(), "8/R".into()], None)
            .unwrap();
        let (batches, dropped) = records_to_batches(&p.records, &roster, 0.1, false).unwrap();
        assert_eq!(dropped, 1);
        assert_eq!(batches.iter().map(|b| b.samples.len()).sum::<usize>(), 8);
        assert!(matches!(
            records_to_batches(&p.records, &roster, 0.1, true),
            Err(IngestError::UnknownPlayer(id)) if id == "9"
        ));
    }

    #[test]
    fn empty_records_give_no_batches() {
        let (b, d) = records_to_batches(&[], &Roster::new(), 0.1, true).unwrap();
        assert!(b.is_empty());
        assert_eq!(d, 0);
    }
}
