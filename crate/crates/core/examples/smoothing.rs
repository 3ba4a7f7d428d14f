//! Three-sample smoothing of a tag moving at 2 yd/s, with and without a gap.

use contact_alert::model::Vec2;
use contact_alert::tracking::TagHistory;

fn main() {
    let weights = [0.5, 0.3, 0.2];
    let mut h = TagHistory::new("A/L");
    for t in [0.0, 0.1, 0.2, 0.5, 0.6] {
        h.push(t, Vec2::new(2.0 * t, 0.0));
        let s = h.smoothed(&weights).unwrap();
        // the smoothed point sits exactly on the track, at its own time
        println!(
            "newest t={t:.1}  smoothed x={:.3} at t={:.3}  lag {:.3} s",
            s.pos.x,
            s.t,
            t - s.t
        );
    }
}
