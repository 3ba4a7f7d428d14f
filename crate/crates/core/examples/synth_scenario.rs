//! Writes a scenario file as a tag feed on stdout.
//!
//! cargo run --example synth_scenario -- fixtures/scenarios/cross_twice.scn

use std::io;

use contact_alert::harness::{write_ndjson, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/scenarios/head_on.scn").into());
    let sc = Scenario::load(path)?;
    write_ndjson(&sc.generate().batches, io::stdout().lock())?;
    Ok(())
}
