//! Pager commands for predicted collisions.
//!
//! Wire format, one command per line:
//!
//! ```text
//! PAGE <pager_id> <vibration_ms>\r\n
//! ```
//!
//! Decimal, no leading zeros, single spaces. Pager ids are 1..=9999 and
//! vibrations 100..=5000 ms.

use std::collections::{HashMap, VecDeque};
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::net::TcpStream;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};

use thiserror::Error;

use crate::config::AlertConfig;
use crate::ingest::Roster;
use crate::model::{CollisionEvent, PlayerId};

pub const PAGER_IDS: std::ops::RangeInclusive<u32> = 1..=9999;
pub const VIBRATION_MS: std::ops::RangeInclusive<u32> = 100..=5000;

#[derive(Debug, Error)]
pub enum AlertError {
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: u32 },
    #[error("cannot decode pager line: {0}")]
    Decode(String),
    #[error("player `{0}` has no pager")]
    UnmappedPlayer(String),
    #[error("unsupported sink uri `{0}`")]
    BadSinkUri(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PagerCommand {
    pub pager_id: u32,
    pub vibration_ms: u32,
    /// Stream time (s) the command was issued at.
    pub issued_at: f64,
}

impl PagerCommand {
    pub fn new(pager_id: u32, vibration_ms: u32, issued_at: f64) -> Result<Self, AlertError> {
        let c = Self {
            pager_id,
            vibration_ms,
            issued_at,
        };
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), AlertError> {
        if !PAGER_IDS.contains(&self.pager_id) {
            return Err(AlertError::OutOfRange {
                field: "pager_id",
                value: self.pager_id,
            });
        }
        if !VIBRATION_MS.contains(&self.vibration_ms) {
            return Err(AlertError::OutOfRange {
                field: "vibration_ms",
                value: self.vibration_ms,
            });
        }
        Ok(())
    }
}

pub fn encode_command(c: &PagerCommand) -> Result<Vec<u8>, AlertError> {
    c.check()?;
    Ok(format!("PAGE {} {}\r\n", c.pager_id, c.vibration_ms).into_bytes())
}

fn decimal(s: &str, field: &'static str) -> Result<u32, AlertError> {
    let well_formed = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit())
        && !(s.len() > 1 && s.starts_with('0'));
    if !well_formed {
        return Err(AlertError::Decode(format!("bad {field} `{s}`")));
    }
    s.parse()
        .map_err(|_| AlertError::Decode(format!("bad {field} `{s}`")))
}

/// Parses one wire line (with its `\r\n`). `issued_at` is not on the wire and
/// comes back as 0.
pub fn decode_command(bytes: &[u8]) -> Result<PagerCommand, AlertError> {
    let text = std::str::from_utf8(bytes).map_err(|e| AlertError::Decode(e.to_string()))?;
    let body = text
        .strip_suffix("\r\n")
        .ok_or_else(|| AlertError::Decode("missing CRLF terminator".into()))?;
    let mut parts = body.split(' ');
    if parts.next() != Some("PAGE") {
        return Err(AlertError::Decode("expected `PAGE`".into()));
    }
    let (Some(id), Some(ms), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(AlertError::Decode("expected two fields".into()));
    };
    PagerCommand::new(decimal(id, "pager_id")?, decimal(ms, "vibration_ms")?, 0.0)
}

/// Turns events into pager commands, enforcing a per-pager refractory interval.
#[derive(Debug, Clone)]
pub struct Dispatcher {
    cfg: AlertConfig,
    last_issued: HashMap<u32, f64>,
    suppressed: u64,
    unmapped: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DispatchOutcome {
    pub commands: Vec<PagerCommand>,
    pub suppressed: u64,
    pub unmapped: u64,
}

impl Dispatcher {
    pub fn new(cfg: AlertConfig) -> Self {
        Self {
            cfg,
            last_issued: HashMap::new(),
            suppressed: 0,
            unmapped: 0,
        }
    }

    /// Commands for `events`, in event order. Each event pages both players
    /// (or only the first when `page_both` is off), at the event's time.
    pub fn dispatch(&mut self, events: &[CollisionEvent], roster: &Roster) -> Vec<PagerCommand> {
        let mut out = Vec::new();
        for e in events {
            let recipients: &[&PlayerId] = if self.cfg.page_both {
                &[e.pair.first(), e.pair.second()]
            } else {
                &[e.pair.first()]
            };
            for player in recipients {
                let Some(pager) = roster.pager_for(player) else {
                    self.unmapped += 1;
                    continue;
                };
                let pager = u32::from(pager);
                if let Some(&last) = self.last_issued.get(&pager) {
                    if e.t - last < self.cfg.refractory_s {
                        self.suppressed += 1;
                        continue;
                    }
                }
                match PagerCommand::new(pager, self.cfg.vibration_ms, e.t) {
                    Ok(cmd) => {
                        self.last_issued.insert(pager, e.t);
                        out.push(cmd);
                    }
                    Err(_) => self.unmapped += 1,
                }
            }
        }
        out
    }

    pub fn suppressed(&self) -> u64 {
        self.suppressed
    }

    pub fn unmapped(&self) -> u64 {
        self.unmapped
    }
}

/// One-shot dispatch with a fresh refractory state.
pub fn dispatch(events: &[CollisionEvent], roster: &Roster, cfg: &AlertConfig) -> DispatchOutcome {
    let mut d = Dispatcher::new(cfg.clone());
    let commands = d.dispatch(events, roster);
    DispatchOutcome {
        commands,
        suppressed: d.suppressed,
        unmapped: d.unmapped,
    }
}

/// Opens a byte sink from `file:PATH`, `serial:DEVICE`, `tcp:HOST:PORT` or
/// `stdout`.
pub fn open_sink(uri: &str) -> Result<Box<dyn Write + Send>, AlertError> {
    if uri == "stdout" || uri == "-" {
        return Ok(Box::new(io::stdout()));
    }
    if let Some(path) = uri.strip_prefix("file:") {
        return Ok(Box::new(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?,
        ));
    }
    if let Some(dev) = uri.strip_prefix("serial:") {
        // serial line settings are left to the OS (stty)
        return Ok(Box::new(OpenOptions::new().write(true).open(dev)?));
    }
    if let Some(addr) = uri.strip_prefix("tcp:") {
        return Ok(Box::new(TcpStream::connect(addr)?));
    }
    Err(AlertError::BadSinkUri(uri.to_owned()))
}

#[derive(Debug, Default)]
struct Queue {
    items: VecDeque<PagerCommand>,
    closed: bool,
}

/// Bounded command queue between the frame loop and the sink writer.
/// Pushing never blocks: when full, the oldest command is dropped.
#[derive(Debug)]
pub struct Outbox {
    queue: Mutex<Queue>,
    ready: Condvar,
    capacity: usize,
    dropped: AtomicU64,
}

impl Outbox {
    pub fn new(capacity: usize) -> Self {
        Self {
            queue: Mutex::new(Queue::default()),
            ready: Condvar::new(),
            capacity: capacity.max(1),
            dropped: AtomicU64::new(0),
        }
    }

    pub fn push(&self, cmd: PagerCommand) {
        let mut q = self.queue.lock().expect("outbox lock poisoned");
        if q.items.len() == self.capacity {
            q.items.pop_front();
            self.dropped.fetch_add(1, Ordering::Relaxed);
        }
        q.items.push_back(cmd);
        self.ready.notify_one();
    }

    /// Blocks until a command is available; `None` once closed and drained.
    pub fn pop(&self) -> Option<PagerCommand> {
        let mut q = self.queue.lock().expect("outbox lock poisoned");
        loop {
            if let Some(c) = q.items.pop_front() {
                return Some(c);
            }
            if q.closed {
                return None;
            }
            q = self.ready.wait(q).expect("outbox lock poisoned");
        }
    }

    pub fn close(&self) {
        self.queue.lock().expect("outbox lock poisoned").closed = true;
        self.ready.notify_all();
    }

    pub fn dropped(&self) -> u64 {
        self.dropped.load(Ordering::Relaxed)
    }
}

/// Drains `outbox` into `sink` on a separate thread until the outbox is
/// closed. Returns the number of commands written.
pub fn spawn_writer<W: Write + Send + 'static>(
    outbox: Arc<Outbox>,
    mut sink: W,
) -> JoinHandle<Result<u64, AlertError>> {
    thread::spawn(move || {
        let mut written = 0;
        while let Some(cmd) = outbox.pop() {
            sink.write_all(&encode_command(&cmd)?)?;
            sink.flush()?;
            written += 1;
        }
        Ok(written)
    })
}
