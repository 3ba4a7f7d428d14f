//! Per-frame processing latency for 22 players over 60 s at 10 Hz.
//!
//! cargo run --release --example latency_bench

use contact_alert::harness::{replay, ReplayInput, Scenario, Speed};
use contact_alert::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = String::from("duration = 60\nseed = 7\nnoise = 0.17 yd\ndropout = 0.1\n");
    for i in 0..22 {
        let (x, y) = (40.0 + 20.0 * (i / 11) as f64, 4.0 + 4.5 * (i % 11) as f64);
        spec.push_str(&format!(
            "player.P{i} = 0 {x} {y}; 20 {} {}; 40 {} {}; 60 {x} {y}\n",
            x + 8.0 - (i % 5) as f64,
            y + 2.0,
            x - 6.0,
            y - 1.5 + (i % 3) as f64
        ));
    }
    let synth = Scenario::parse(&spec)?.generate();
    let out = replay(ReplayInput::from_batches(synth.roster, synth.batches), &RunConfig::default(), Speed::Max)?;
    print!("{}", out.stats.render());
    Ok(())
}
