use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;
use std::thread;
use std::time::{Duration, Instant};

use crate::alerts::{Dispatcher, PagerCommand};
use crate::config::RunConfig;
use crate::error::Result;
use crate::evaluation::{detect_actual, match_events, raw_player_states, GroundTruthConfig, MatchReport};
use crate::eventlog::event_log_string;
use crate::ingest::{
    fill_frame_gaps, parse_feed_line, parse_tracking_csv, records_to_batches, FieldBounds,
    FrameAssembler, FrameBatch, Roster,
};
use crate::model::CollisionEvent;

use super::{Engine, RunStats};

/// Replay pacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    /// As fast as possible.
    Max,
    /// Stream time divided by the factor (`1x`, `2x`, `0.5x`).
    Realtime(f64),
}

impl FromStr for Speed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "max" {
            return Ok(Speed::Max);
        }
        let factor = s
            .strip_suffix('x')
            .and_then(|k| k.parse::<f64>().ok())
            .filter(|k| k.is_finite() && *k > 0.0)
            .ok_or_else(|| format!("speed must be `max` or a positive factor like `2x`, got `{s}`"))?;
        Ok(Speed::Realtime(factor))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Recorded tracking CSV, one row per player per frame.
    Csv,
    /// Line-delimited tag feed.
    Ndjson,
}

impl InputFormat {
    /// By extension, falling back to the first non-blank byte (`{` means ndjson).
    pub fn detect(path: &Path, head: &[u8]) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => InputFormat::Csv,
            Some("ndjson" | "jsonl" | "json") => InputFormat::Ndjson,
            _ => match head.iter().find(|b| !b.is_ascii_whitespace()) {
                Some(b'{') => InputFormat::Ndjson,
                _ => InputFormat::Csv,
            },
        }
    }
}

/// Frame batches ready for replay.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayInput {
    pub roster: Roster,
    /// Grow the roster from tag names as samples arrive.
    pub open_roster: bool,
    pub batches: Vec<FrameBatch>,
    pub skipped: u64,
    pub dropped: u64,
}

impl ReplayInput {
    pub fn from_batches(roster: Roster, batches: Vec<FrameBatch>) -> Self {
        Self {
            roster,
            batches,
            ..Default::default()
        }
    }

    /// Tracking CSV. Without a roster, every non-ball player gets one tag
    /// named after its id. `play` selects a `(game id, play id)`; otherwise
    /// the first play in the file is used.
    pub fn from_csv<R: Read>(
        reader: R,
        roster: Option<Roster>,
        sample_dt: f64,
        play: Option<(&str, &str)>,
    ) -> Result<Self> {
        let parsed = parse_tracking_csv(reader, play, &FieldBounds::default())?;
        let mut records = parsed.records;
        let mut dropped = 0;
        if play.is_none() {
            if let Some(first) = records.first() {
                let key = (first.game_id.clone(), first.play_id.clone());
                let before = records.len();
                records.retain(|r| r.game_id == key.0 && r.play_id == key.1);
                dropped += before - records.len();
            }
        }
        let roster = match roster {
            Some(r) => r,
            None => {
                let mut ids: Vec<&str> = Vec::new();
                for r in &records {
                    if r.player_id != "ball" && !ids.contains(&r.player_id.as_str()) {
                        ids.push(&r.player_id);
                    }
                }
                Roster::single_tag(ids)?
            }
        };
        let (batches, more) = records_to_batches(&records, &roster, sample_dt, false)?;
        Ok(Self {
            roster,
            open_roster: false,
            batches,
            skipped: parsed.skipped as u64,
            dropped: (dropped + more) as u64,
        })
    }

    /// Tag feed lines. Malformed lines are counted and skipped. Without a
    /// roster, players are inferred from `<player>/<suffix>` tag names.
    pub fn from_ndjson<R: BufRead>(reader: R, roster: Option<Roster>, sample_dt: f64) -> Result<Self> {
        let mut asm = FrameAssembler::new(sample_dt);
        let mut batches = Vec::new();
        let mut skipped = 0;
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match parse_feed_line(&line) {
                Ok(s) => batches.extend(asm.push(s)),
                Err(_) => skipped += 1,
            }
        }
        batches.extend(asm.close());
        Ok(Self {
            open_roster: roster.is_none(),
            roster: roster.unwrap_or_default(),
            batches,
            skipped,
            dropped: asm.late_samples() + asm.duplicate_samples(),
        })
    }
}

/// Reads a replay file in either format. An empty file is an empty play.
pub fn load_input(path: &Path, roster: Option<Roster>, cfg: &RunConfig) -> Result<ReplayInput> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(ReplayInput {
            open_roster: roster.is_none(),
            roster: roster.unwrap_or_default(),
            ..Default::default()
        });
    }
    let dt = cfg.predictor.sample_dt;
    match InputFormat::detect(path, &bytes) {
        InputFormat::Csv => ReplayInput::from_csv(&bytes[..], roster, dt, None),
        InputFormat::Ndjson => ReplayInput::from_ndjson(BufReader::new(&bytes[..]), roster, dt),
    }
}

#[derive(Debug, Clone)]
pub struct ReplayOutput {
    pub events: Vec<CollisionEvent>,
    /// Ground truth from raw (unsmoothed) positions.
    pub actual: Vec<CollisionEvent>,
    pub report: MatchReport,
    pub commands: Vec<PagerCommand>,
    pub roster: Roster,
    pub stats: RunStats,
}

impl ReplayOutput {
    pub fn event_log(&self) -> String {
        event_log_string(&self.events)
    }
}

/// Runs the pipeline over `input` frame by frame and scores the predictions
/// against ground truth detected on the same data.
pub fn replay(input: ReplayInput, cfg: &RunConfig, speed: Speed) -> Result<ReplayOutput> {
    cfg.predictor.validate()?;
    let dt = cfg.predictor.sample_dt;
    let batches = fill_frame_gaps(input.batches, dt);
    let mut engine = if input.open_roster {
        Engine::with_open_roster(cfg.predictor.clone(), input.roster)
    } else {
        Engine::new(cfg.predictor.clone(), input.roster)
    };
    let mut dispatcher = Dispatcher::new(cfg.alerts.clone());
    let mut events = Vec::new();
    let mut commands = Vec::new();

    let start = Instant::now();
    let t0 = batches.first().map_or(0.0, |b| b.t);
    for b in &batches {
        if let Speed::Realtime(k) = speed {
            let due = start + Duration::from_secs_f64(((b.t - t0) / k).max(0.0));
            let now = Instant::now();
            if due > now {
                thread::sleep(due - now);
            }
        }
        let fired = engine.process(b.clone());
        commands.extend(dispatcher.dispatch(&fired, engine.roster()));
        events.extend(fired);
    }
    let wall = start.elapsed();

    let roster = engine.roster().clone();
    let actual = detect_actual(
        &raw_player_states(&batches, &roster),
        &GroundTruthConfig::from(&cfg.predictor),
    );
    let report = match_events(&events, &actual, cfg.predictor.match_tolerance);

    let mut stats = engine.into_stats();
    stats.skipped_inputs += input.skipped;
    stats.dropped_inputs += input.dropped;
    stats.suppressed_pages = dispatcher.suppressed();
    stats.pager_commands = commands.len() as u64;
    stats.wall = wall;
    Ok(ReplayOutput {
        events,
        actual,
        report,
        commands,
        roster,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{write_ndjson, Scenario};

    const HEAD_ON: &str = "\
duration = 6
player.A = 0 0 0; 6 12 0
player.B = 0 10 0; 6 -2 0
";

    fn pilot() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn speed_parsing() {
        assert_eq!("max".parse::<Speed>(), Ok(Speed::Max));
        assert_eq!("2x".parse::<Speed>(), Ok(Speed::Realtime(2.0)));
        assert!("0x".parse::<Speed>().is_err());
        assert!("fast".parse::<Speed>().is_err());
    }

    #[test]
    fn head_on_in_process() {
        let synth = Scenario::parse(HEAD_ON).unwrap().generate();
        let out = replay(ReplayInput::from_batches(synth.roster, synth.batches), &pilot(), Speed::Max).unwrap();
        assert_eq!(out.events.len(), 1);
        assert_eq!(out.events[0].frame, 23);
        assert_eq!(out.actual.len(), 1);
        assert_eq!(out.actual[0].frame, 24);
        assert_eq!((out.report.false_positives, out.report.false_negatives), (0, 0));
        assert_eq!(out.commands.len(), 2);
        assert_eq!(out.stats.frames_processed, 61);
    }

    #[test]
    fn ndjson_matches_in_process() {
        let synth = Scenario::parse(HEAD_ON).unwrap().with_noise(0.1, 0.1).with_seed(3).generate();
        let mut buf = Vec::new();
        write_ndjson(&synth.batches, &mut buf).unwrap();
        let from_file = ReplayInput::from_ndjson(&buf[..], None, 0.1).unwrap();
        let a = replay(from_file, &pilot(), Speed::Max).unwrap();
        let b = replay(ReplayInput::from_batches(synth.roster, synth.batches), &pilot(), Speed::Max).unwrap();
        assert_eq!(a.event_log(), b.event_log());
    }

    #[test]
    fn empty_input() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        std::fs::write(&p, "").unwrap();
        let input = load_input(&p, None, &pilot()).unwrap();
        let out = replay(input, &pilot(), Speed::Max).unwrap();
        assert!(out.events.is_empty());
        assert_eq!(out.stats.frames_processed, 0);
    }

    #[test]
    fn malformed_lines_are_counted() {
        let text = "{\"tag\":\"A\",\"t\":0,\"x\":0,\"y\":0}\nnot json\n{\"tag\":\"A\",\"t\":0.1,\"x\":1,\"y\":0}\n";
        let input = ReplayInput::from_ndjson(text.as_bytes(), None, 0.1).unwrap();
        assert_eq!(input.skipped, 1);
        assert_eq!(input.batches.len(), 2);
    }

    #[test]
    fn format_detection() {
        assert_eq!(InputFormat::detect(Path::new("a.csv"), b"{"), InputFormat::Csv);
        assert_eq!(InputFormat::detect(Path::new("a"), b"  {\"tag\""), InputFormat::Ndjson);
        assert_eq!(InputFormat::detect(Path::new("a"), b"time,x"), InputFormat::Csv);
    }
}
