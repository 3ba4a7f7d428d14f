//! Ground-truth incidents, predicted-vs-actual matching and the summary table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use crate::config::PredictorConfig;
use crate::ingest::{FrameBatch, IngestError, Roster};
use crate::model::{CollisionEvent, EventKind, PlayerPair, PlayerState};
use crate::predictor::{EpisodeRule, PairState};
use crate::tracking::fuse_player;

/// Ground truth uses the same episode rule as the predictor so that episode
/// counts are comparable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthConfig {
    pub threshold: f64,
    pub hysteresis_factor: f64,
    pub min_event_gap: u32,
}

impl From<&PredictorConfig> for GroundTruthConfig {
    fn from(c: &PredictorConfig) -> Self {
        Self {
            threshold: c.threshold,
            hysteresis_factor: c.hysteresis_factor,
            min_event_gap: c.min_event_gap,
        }
    }
}

impl GroundTruthConfig {
    fn rule(&self) -> EpisodeRule {
        EpisodeRule {
            threshold: self.threshold,
            hysteresis_factor: self.hysteresis_factor,
            min_event_gap: self.min_event_gap,
        }
    }
}

/// Player positions straight from the samples: the midpoint of whatever tags
/// reported this frame, held when none did. No smoothing, no velocity.
pub fn raw_player_states(batches: &[FrameBatch], roster: &Roster) -> Vec<Vec<PlayerState>> {
    let mut last: Vec<Option<PlayerState>> = vec![None; roster.len()];
    batches
        .iter()
        .map(|batch| {
            let mut fresh: Vec<Vec<_>> = vec![Vec::new(); roster.len()];
            for s in &batch.samples {
                if let Some(i) = roster.index_of_tag(&s.tag_id) {
                    fresh[i].push(s.pos);
                }
            }
            roster
                .players()
                .iter()
                .zip(last.iter_mut())
                .zip(fresh)
                .filter_map(|((player, slot), points)| {
                    match fuse_player(&points).ok().map(|f| f.pos) {
                        Some(pos) => {
                            *slot = Some(PlayerState::at_rest(player.id.clone(), batch.frame, batch.t, pos))
                        }
                        None => {
                            let s = slot.as_mut()?;
                            s.frame = batch.frame;
                            s.t = batch.t;
                            s.staleness += 1;
                        }
                    }
                    slot.clone()
                })
                .collect()
        })
        .collect()
}

/// Actual incidents: an event at the first frame of every episode in which a
/// pair's measured distance is under the threshold.
pub fn detect_actual(frames: &[Vec<PlayerState>], cfg: &GroundTruthConfig) -> Vec<CollisionEvent> {
    let rule = cfg.rule();
    let mut pairs: BTreeMap<PlayerPair, PairState> = BTreeMap::new();
    let mut out = Vec::new();
    for states in frames {
        let mut frame_events = Vec::new();
        for (i, a) in states.iter().enumerate() {
            for b in &states[i + 1..] {
                let Ok(pair) = PlayerPair::new(a.player.clone(), b.player.clone()) else {
                    continue;
                };
                let d = a.pos.distance(b.pos);
                let ps = pairs
                    .entry(pair.clone())
                    .or_insert_with(|| PairState::new(pair.clone()));
                if ps.advance(a.frame, d, d < cfg.threshold, &rule) {
                    frame_events.push(CollisionEvent::actual(pair, a.frame, a.t));
                }
            }
        }
        frame_events.sort_by(|x, y| x.pair.cmp(&y.pair));
        out.extend(frame_events);
    }
    out
}

/// One line of the match listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchRow {
    pub pair: PlayerPair,
    pub actual: Option<i64>,
    pub predicted: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// FP / (TP + FP), or 0 when nothing was predicted.
    pub false_alarm_rate: f64,
    /// Predicted minus actual frame for each match, in actual-event order.
    pub timing_errors: Vec<i64>,
    pub rows: Vec<MatchRow>,
}

/// Greedy nearest-frame matching of same-pair events within `tolerance`
/// frames. Closest candidates are taken first; ties go to the earlier
/// event. Each event matches at most once.
pub fn match_events(predicted: &[CollisionEvent], actual: &[CollisionEvent], tolerance: i64) -> MatchReport {
    let mut candidates = Vec::new();
    for (pi, p) in predicted.iter().enumerate() {
        for (ai, a) in actual.iter().enumerate() {
            let delta = p.frame - a.frame;
            if p.pair == a.pair && delta.abs() <= tolerance {
                let key = (delta.abs(), p.frame.min(a.frame), p.frame.max(a.frame));
                candidates.push((key, pi, ai));
            }
        }
    }
    candidates.sort();

    let mut p_used = vec![false; predicted.len()];
    let mut a_match: Vec<Option<usize>> = vec![None; actual.len()];
    for (_, pi, ai) in candidates {
        if !p_used[pi] && a_match[ai].is_none() {
            p_used[pi] = true;
            a_match[ai] = Some(pi);
        }
    }

    let mut order: Vec<usize> = (0..actual.len()).collect();
    order.sort_by(|&x, &y| (actual[x].frame, &actual[x].pair).cmp(&(actual[y].frame, &actual[y].pair)));

    let mut report = MatchReport::default();
    for ai in order {
        let a = &actual[ai];
        let predicted_frame = a_match[ai].map(|pi| predicted[pi].frame);
        match predicted_frame {
            Some(f) => {
                report.true_positives += 1;
                report.timing_errors.push(f - a.frame);
            }
            None => report.false_negatives += 1,
        }
        report.rows.push(MatchRow {
            pair: a.pair.clone(),
            actual: Some(a.frame),
            predicted: predicted_frame,
        });
    }
    for (pi, p) in predicted.iter().enumerate() {
        if !p_used[pi] {
            report.false_positives += 1;
            report.rows.push(MatchRow {
                pair: p.pair.clone(),
                actual: None,
                predicted: Some(p.frame),
            });
        }
    }
    report.rows.sort_by_key(|r| (row_frame(r), r.pair.clone()));
    let flagged = report.true_positives + report.false_positives;
    report.false_alarm_rate = if flagged == 0 {
        0.0
    } else {
        report.false_positives as f64 / flagged as f64
    };
    report
}

fn row_frame(r: &MatchRow) -> i64 {
    r.actual.or(r.predicted).unwrap_or(i64::MAX)
}

fn aggregate_line(name: &str, r: &MatchReport) -> String {
    let timing: Vec<String> = r.timing_errors.iter().map(i64::to_string).collect();
    format!(
        "# {name}: TP={} FP={} FN={} FAR={:.3} ({:.1}%) timing=[{}]",
        r.true_positives,
        r.false_positives,
        r.false_negatives,
        r.false_alarm_rate,
        r.false_alarm_rate * 100.0,
        timing.join(",")
    )
}

/// Renders reports for one or more estimator variants as a table with one
/// row per incident (`index,player_a,player_b,actual_frame,<variant>_frame...`)
/// followed by one `# variant: TP=.. FP=.. FN=.. FAR=..` line per non-empty
/// report. Missed cells are blank. Output depends only on the inputs.
pub fn summarize(variants: &[(&str, &MatchReport)]) -> String {
    // An incident row is keyed by (pair, actual frame); false positives get a
    // row of their own per variant.
    type Key = (PlayerPair, Option<i64>, usize, i64);
    let mut rows: BTreeMap<Key, Vec<Option<i64>>> = BTreeMap::new();
    for (vi, (_, report)) in variants.iter().enumerate() {
        for r in &report.rows {
            let key = match r.actual {
                Some(a) => (r.pair.clone(), Some(a), usize::MAX, 0),
                None => (r.pair.clone(), None, vi, r.predicted.unwrap_or_default()),
            };
            let cells = rows.entry(key).or_insert_with(|| vec![None; variants.len()]);
            if r.predicted.is_some() {
                cells[vi] = r.predicted;
            }
        }
    }
    let mut ordered: Vec<_> = rows.into_iter().collect();
    ordered.sort_by_key(|((pair, actual, _, _), cells)| {
        let first = actual.or_else(|| cells.iter().flatten().min().copied()).unwrap_or(i64::MAX);
        (first, actual.is_none(), pair.clone())
    });

    let mut out = String::from("index,player_a,player_b,actual_frame");
    for (name, _) in variants {
        write!(out, ",{name}_frame").unwrap();
    }
    out.push('\n');
    let cell = |f: &Option<i64>| f.map(|v| v.to_string()).unwrap_or_default();
    for (i, ((pair, actual, _, _), cells)) in ordered.iter().enumerate() {
        write!(out, "{},{},{},{}", i + 1, csv_field(pair.first().as_str()), csv_field(pair.second().as_str()), cell(actual)).unwrap();
        for c in cells {
            write!(out, ",{}", cell(c)).unwrap();
        }
        out.push('\n');
    }
    for (name, report) in variants {
        if report.true_positives + report.false_positives + report.false_negatives > 0 {
            out.push_str(&aggregate_line(name, report));
            out.push('\n');
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Incident table in the fixture layout
/// `index,player_a,player_b,actual_frame,<variant>_frame,...`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IncidentTable {
    pub actual: Vec<CollisionEvent>,
    /// Variant name (column header without `_frame`) and its predicted events.
    pub variants: Vec<(String, Vec<CollisionEvent>)>,
}

impl IncidentTable {
    /// Reads an incident table. Frame numbers are converted to times with
    /// `sample_dt`, counting the first frame as 1.
    pub fn from_csv<R: Read>(reader: R, sample_dt: f64) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let col = |name: &str| header.iter().position(|h| h == name);
        let (Some(ca), Some(cb), Some(cact)) = (col("player_a"), col("player_b"), col("actual_frame")) else {
            return Err(IngestError::MissingHeader);
        };
        let variant_cols: Vec<(usize, String)> = header
            .iter()
            .enumerate()
            .filter(|(i, _)| *i > cact)
            .map(|(i, h)| (i, h.strip_suffix("_frame").unwrap_or(h).to_owned()))
            .collect();
        let mut table = IncidentTable {
            actual: Vec::new(),
            variants: variant_cols.iter().map(|(_, n)| (n.clone(), Vec::new())).collect(),
        };
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let bad = |msg: String| IngestError::BadRoster(format!("incident row {}: {msg}", line + 1));
            let pair = PlayerPair::new(
                row.get(ca).unwrap_or_default().into(),
                row.get(cb).unwrap_or_default().into(),
            )
            .map_err(|e| bad(e.to_string()))?;
            let frame_at = |i: usize| -> Result<Option<i64>, IngestError> {
                match row.get(i).filter(|s| !s.is_empty()) {
                    None => Ok(None),
                    Some(s) => s.parse().map(Some).map_err(|_| bad(format!("bad frame `{s}`"))),
                }
            };
            let t = |f: i64| (f - 1) as f64 * sample_dt;
            if let Some(f) = frame_at(cact)? {
                table.actual.push(CollisionEvent::actual(pair.clone(), f, t(f)));
            }
            for (slot, (i, _)) in variant_cols.iter().enumerate() {
                if let Some(f) = frame_at(*i)? {
                    table.variants[slot].1.push(CollisionEvent {
                        pair: pair.clone(),
                        frame: f,
                        t: t(f),
                        kind: EventKind::Predicted,
                        min_predicted_distance: None,
                    });
                }
            }
        }
        Ok(table)
    }

    /// Matches every variant against the actual events.
    pub fn evaluate(&self, tolerance: i64) -> Vec<(String, MatchReport)> {
        self.variants
            .iter()
            .map(|(name, events)| (name.clone(), match_events(events, &self.actual, tolerance)))
            .collect()
    }
}
