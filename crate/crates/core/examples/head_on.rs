//! Two players closing at 4 yd/s: distance table, prediction and ground truth.

use contact_alert::harness::{replay, ReplayInput, Scenario, Speed};
use contact_alert::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = Scenario::parse("duration = 6\nplayer.A = 0 0 0; 6 12 0\nplayer.B = 0 10 0; 6 -2 0\n")?;
    let cfg = RunConfig::default();
    println!("threshold {:.4} yd", cfg.predictor.threshold);
    for (k, pos) in sc.truth().iter().enumerate().skip(20).take(7) {
        println!("frame {k:2}  distance {:.2}", pos[0].distance(pos[1]));
    }
    let synth = sc.generate();
    let out = replay(ReplayInput::from_batches(synth.roster, synth.batches), &cfg, Speed::Max)?;
    for e in out.events.iter().chain(&out.actual) {
        println!("{} at frame {} ({} / {})", e.kind.as_str(), e.frame, e.pair.first(), e.pair.second());
    }
    println!(
        "TP={} FP={} FN={}",
        out.report.true_positives, out.report.false_positives, out.report.false_negatives
    );
    Ok(())
}
