//! Scores the two estimator columns of the bundled incident table.
//!
//! cargo run --example evaluate_incidents

use std::fs::File;

use contact_alert::evaluation::{summarize, IncidentTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/incidents.csv");
    let table = IncidentTable::from_csv(File::open(path)?, 0.1)?;
    let reports = table.evaluate(5);
    let named: Vec<(&str, _)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
    print!("{}", summarize(&named));
    Ok(())
}
