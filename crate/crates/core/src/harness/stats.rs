use std::fmt::Write as _;
use std::time::Duration;

use hdrhistogram::Histogram;

/// Counters and per-frame latency for one run.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub frames_processed: u64,
    pub events_predicted: u64,
    /// Per-frame processing time in nanoseconds.
    pub latency_ns: Histogram<u64>,
    /// Feed lines or CSV rows that could not be parsed.
    pub skipped_inputs: u64,
    /// Records dropped during frame assembly (ball rows, unrostered players,
    /// duplicates, late samples).
    pub dropped_inputs: u64,
    /// Pager commands suppressed by the refractory interval.
    pub suppressed_pages: u64,
    /// Pager commands dropped because the outbox was full.
    pub outbox_dropped: u64,
    pub pager_commands: u64,
    pub wall: Duration,
}

impl Default for RunStats {
    fn default() -> Self {
        Self {
            frames_processed: 0,
            events_predicted: 0,
            latency_ns: Histogram::new_with_bounds(1, 60_000_000_000, 3)
                .expect("static histogram bounds are valid"),
            skipped_inputs: 0,
            dropped_inputs: 0,
            suppressed_pages: 0,
            outbox_dropped: 0,
            pager_commands: 0,
            wall: Duration::ZERO,
        }
    }
}

impl RunStats {
    pub fn record_frame(&mut self, elapsed: Duration) {
        let ns = u64::try_from(elapsed.as_nanos()).unwrap_or(u64::MAX);
        self.latency_ns.saturating_record(ns.max(1));
        self.frames_processed += 1;
    }

    pub fn latency_quantile(&self, q: f64) -> Duration {
        if self.latency_ns.is_empty() {
            return Duration::ZERO;
        }
        Duration::from_nanos(self.latency_ns.value_at_quantile(q))
    }

    pub fn median_latency(&self) -> Duration {
        self.latency_quantile(0.5)
    }

    pub fn p99_latency(&self) -> Duration {
        self.latency_quantile(0.99)
    }

    pub fn render(&self) -> String {
        let us = |d: Duration| d.as_secs_f64() * 1e6;
        let mut s = String::new();
        writeln!(s, "frames_processed={}", self.frames_processed).unwrap();
        writeln!(s, "events_predicted={}", self.events_predicted).unwrap();
        writeln!(s, "latency_median_us={:.1}", us(self.median_latency())).unwrap();
        writeln!(s, "latency_p99_us={:.1}", us(self.p99_latency())).unwrap();
        writeln!(s, "latency_max_us={:.1}", us(self.latency_quantile(1.0))).unwrap();
        writeln!(s, "skipped_inputs={}", self.skipped_inputs).unwrap();
        writeln!(s, "dropped_inputs={}", self.dropped_inputs).unwrap();
        writeln!(s, "pager_commands={}", self.pager_commands).unwrap();
        writeln!(s, "suppressed_pages={}", self.suppressed_pages).unwrap();
        writeln!(s, "outbox_dropped={}", self.outbox_dropped).unwrap();
        writeln!(s, "wall_ms={:.1}", self.wall.as_secs_f64() * 1e3).unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_frames() {
        let mut s = RunStats::default();
        for us in [5u64, 7, 9, 11, 2000] {
            s.record_frame(Duration::from_micros(us));
        }
        assert_eq!(s.latency_ns.len(), s.frames_processed);
        let median = s.median_latency().as_micros();
        assert!((8..=10).contains(&median), "{median}");
        assert!(s.p99_latency() >= Duration::from_micros(1990));
        assert!(s.render().contains("frames_processed=5"));
    }

    #[test]
    fn empty_stats() {
        let s = RunStats::default();
        assert_eq!(s.median_latency(), Duration::ZERO);
    }
}
