//! Event log CSV: `frame,t,kind,player_a,player_b,min_predicted_distance`.
//!
//! Times are written with millisecond precision and distances with four
//! decimals, so identical event lists always produce identical bytes.

use std::io::{Read, Write};

use crate::ingest::IngestError;
use crate::model::{CollisionEvent, EventKind, PlayerPair};

pub const EVENT_LOG_HEADER: &str = "frame,t,kind,player_a,player_b,min_predicted_distance";

pub fn write_event_log<W: Write>(events: &[CollisionEvent], writer: W) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(EVENT_LOG_HEADER.split(','))?;
    for e in events {
        w.write_record([
            e.frame.to_string(),
            format!("{:.3}", e.t),
            e.kind.as_str().to_owned(),
            e.pair.first().to_string(),
            e.pair.second().to_string(),
            e.min_predicted_distance
                .map(|d| format!("{d:.4}"))
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn event_log_string(events: &[CollisionEvent]) -> String {
    let mut buf = Vec::new();
    write_event_log(events, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_event_log<R: Read>(reader: R) -> Result<Vec<CollisionEvent>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != EVENT_LOG_HEADER {
        return Err(IngestError::MissingHeader);
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let bad = || IngestError::MalformedJson(format!("event log row {}", i + 1));
        let num = |k: usize| row.get(k).unwrap_or_default().parse::<f64>().map_err(|_| bad());
        let pair = PlayerPair::new(
            row.get(3).unwrap_or_default().into(),
            row.get(4).unwrap_or_default().into(),
        )
        .map_err(|_| bad())?;
        out.push(CollisionEvent {
            pair,
            frame: row.get(0).unwrap_or_default().parse().map_err(|_| bad())?,
            t: num(1)?,
            kind: EventKind::parse(row.get(2).unwrap_or_default()).ok_or_else(bad)?,
            min_predicted_distance: match row.get(5) {
                Some(s) if !s.is_empty() => Some(num(5)?),
                _ => None,
            },
        });
    }
    Ok(out)
}
