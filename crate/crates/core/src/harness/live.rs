//! Live mode: feed reader thread, frame processor, pager writer thread.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::sync::mpsc::{sync_channel, RecvTimeoutError, SyncSender};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use crate::alerts::{open_sink, spawn_writer, Dispatcher, Outbox};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ingest::{parse_feed_line, FrameAssembler, FrameBatch, IngestError, Roster};
use crate::model::CollisionEvent;

use super::{Engine, RunStats};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeedSource {
    Stdin,
    File(PathBuf),
    /// `host:port`, reconnected on failure.
    Tcp(String),
}

impl FeedSource {
    /// `-` or `stdin`, `file:PATH` or a bare path, `tcp:HOST:PORT`.
    pub fn parse(uri: &str) -> Result<Self, IngestError> {
        match uri {
            "" => Err(IngestError::BadFeedUri(uri.to_owned())),
            "-" | "stdin" => Ok(FeedSource::Stdin),
            _ => {
                if let Some(addr) = uri.strip_prefix("tcp:") {
                    if addr.rsplit_once(':').is_none_or(|(h, p)| h.is_empty() || p.parse::<u16>().is_err()) {
                        return Err(IngestError::BadFeedUri(uri.to_owned()));
                    }
                    return Ok(FeedSource::Tcp(addr.to_owned()));
                }
                if uri.contains("://") {
                    return Err(IngestError::BadFeedUri(uri.to_owned()));
                }
                Ok(FeedSource::File(PathBuf::from(uri.strip_prefix("file:").unwrap_or(uri))))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiveOptions {
    pub config: RunConfig,
    /// Without a roster, players are inferred from tag names.
    pub roster: Option<Roster>,
    /// Failed TCP connection attempts in a row before giving up.
    pub retry_limit: u32,
    /// First reconnect delay; doubles per attempt up to 5 s.
    pub retry_backoff: Duration,
    /// Capacity of the reader-to-processor line queue.
    pub queue_capacity: usize,
}

impl Default for LiveOptions {
    fn default() -> Self {
        Self {
            config: RunConfig::default(),
            roster: None,
            retry_limit: 5,
            retry_backoff: Duration::from_millis(200),
            queue_capacity: 1024,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiveOutput {
    pub events: Vec<CollisionEvent>,
    pub roster: Roster,
    pub stats: RunStats,
}

enum FeedMsg {
    Line(String),
    Malformed,
    Failed(Error),
}

fn pump_lines<R: BufRead>(reader: R, tx: &SyncSender<FeedMsg>) -> io::Result<bool> {
    for line in reader.lines() {
        let msg = match line {
            Ok(l) => FeedMsg::Line(l),
            Err(e) if e.kind() == io::ErrorKind::InvalidData => FeedMsg::Malformed,
            Err(e) => return Err(e),
        };
        if tx.send(msg).is_err() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn spawn_reader<R: BufRead + Send + 'static>(reader: R, tx: SyncSender<FeedMsg>) {
    thread::spawn(move || {
        if let Err(e) = pump_lines(reader, &tx) {
            let _ = tx.send(FeedMsg::Failed(e.into()));
        }
    });
}

/// Reads `addr` until a clean end of stream, reconnecting after connection
/// failures with exponential backoff.
fn spawn_tcp_reader(addr: String, opts: &LiveOptions, tx: SyncSender<FeedMsg>) {
    let (limit, backoff) = (opts.retry_limit, opts.retry_backoff);
    thread::spawn(move || {
        let mut failures = 0u32;
        loop {
            let reason = match TcpStream::connect(&addr) {
                Ok(stream) => {
                    failures = 0;
                    match pump_lines(BufReader::new(stream), &tx) {
                        Ok(_) => return,
                        Err(e) => e.to_string(),
                    }
                }
                Err(e) => e.to_string(),
            };
            failures += 1;
            if failures > limit {
                let _ = tx.send(FeedMsg::Failed(Error::ConnectionLost {
                    attempts: failures,
                    reason,
                }));
                return;
            }
            let delay = backoff.saturating_mul(1 << (failures - 1).min(16));
            thread::sleep(delay.min(Duration::from_secs(5)));
        }
    });
}

/// Runs live mode between a feed URI and a pager sink URI until the feed ends.
pub fn run_live(feed: &str, sink: &str, opts: &LiveOptions) -> Result<LiveOutput> {
    let source = FeedSource::parse(feed)?;
    let sink = open_sink(sink)?;
    let (tx, rx) = sync_channel(opts.queue_capacity.max(1));
    match source {
        FeedSource::Stdin => spawn_reader(BufReader::new(io::stdin()), tx),
        FeedSource::File(p) => spawn_reader(BufReader::new(File::open(p)?), tx),
        FeedSource::Tcp(addr) => spawn_tcp_reader(addr, opts, tx),
    }
    process_feed(rx, sink, opts)
}

/// Live mode over an already-open reader, e.g. one end of a pipe.
pub fn run_live_reader<R, W>(reader: R, sink: W, opts: &LiveOptions) -> Result<LiveOutput>
where
    R: BufRead + Send + 'static,
    W: Write + Send + 'static,
{
    let (tx, rx) = sync_channel(opts.queue_capacity.max(1));
    spawn_reader(reader, tx);
    process_feed(rx, sink, opts)
}

fn process_feed<W: Write + Send + 'static>(
    rx: std::sync::mpsc::Receiver<FeedMsg>,
    sink: W,
    opts: &LiveOptions,
) -> Result<LiveOutput> {
    let cfg = &opts.config;
    cfg.predictor.validate()?;
    let dt = cfg.predictor.sample_dt;
    let frame_timeout = Duration::from_secs_f64(1.5 * dt);

    let mut engine = match &opts.roster {
        Some(r) => Engine::new(cfg.predictor.clone(), r.clone()),
        None => Engine::with_open_roster(cfg.predictor.clone(), Roster::new()),
    };
    let mut asm = FrameAssembler::new(dt);
    let mut dispatcher = Dispatcher::new(cfg.alerts.clone());
    let outbox = Arc::new(Outbox::new(cfg.alerts.outbox_capacity));
    let writer = spawn_writer(Arc::clone(&outbox), sink);

    let mut events = Vec::new();
    let mut skipped = 0;
    let mut failure = None;
    let start = Instant::now();

    let mut handle = |batch: FrameBatch, engine: &mut Engine, events: &mut Vec<CollisionEvent>| {
        let fired = engine.process(batch);
        for cmd in dispatcher.dispatch(&fired, engine.roster()) {
            outbox.push(cmd);
        }
        events.extend(fired);
    };

    loop {
        let msg = if asm.has_open_frame() {
            match rx.recv_timeout(frame_timeout) {
                Ok(m) => m,
                Err(RecvTimeoutError::Timeout) => {
                    if let Some(b) = asm.close() {
                        handle(b, &mut engine, &mut events);
                    }
                    continue;
                }
                Err(RecvTimeoutError::Disconnected) => break,
            }
        } else {
            match rx.recv() {
                Ok(m) => m,
                Err(_) => break,
            }
        };
        match msg {
            FeedMsg::Line(line) => {
                if line.trim().is_empty() {
                    continue;
                }
                match parse_feed_line(&line) {
                    Ok(sample) => {
                        if let Some(b) = asm.push(sample) {
                            handle(b, &mut engine, &mut events);
                        }
                    }
                    Err(_) => skipped += 1,
                }
            }
            FeedMsg::Malformed => skipped += 1,
            FeedMsg::Failed(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if let Some(b) = asm.close() {
        handle(b, &mut engine, &mut events);
    }
    outbox.close();
    let written = writer.join().expect("pager writer panicked")?;
    if let Some(e) = failure {
        return Err(e);
    }

    let roster = engine.roster().clone();
    let mut stats = engine.into_stats();
    stats.skipped_inputs += skipped;
    stats.dropped_inputs += asm.late_samples() + asm.duplicate_samples();
    stats.suppressed_pages = dispatcher.suppressed();
    stats.outbox_dropped = outbox.dropped();
    stats.pager_commands = written;
    stats.wall = start.elapsed();
    Ok(LiveOutput { events, roster, stats })
}
