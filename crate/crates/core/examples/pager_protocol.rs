//! Encoding pager commands and the per-pager refractory interval.

use contact_alert::alerts::{decode_command, dispatch, encode_command};
use contact_alert::ingest::Roster;
use contact_alert::model::{CollisionEvent, PlayerPair};
use contact_alert::AlertConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let roster = Roster::single_tag(["A", "B", "C"])?;
    let ab = PlayerPair::new("A".into(), "B".into())?;
    let ac = PlayerPair::new("A".into(), "C".into())?;
    let events = [
        CollisionEvent::predicted(ab.clone(), 10, 1.0, 0.4),
        CollisionEvent::predicted(ac, 14, 1.4, 0.5),
        CollisionEvent::predicted(ab, 25, 2.5, 0.3),
    ];
    let out = dispatch(&events, &roster, &AlertConfig::default());
    for c in &out.commands {
        let bytes = encode_command(c)?;
        assert_eq!(decode_command(&bytes)?.pager_id, c.pager_id);
        println!("t={:.1}  {:?}", c.issued_at, String::from_utf8(bytes)?);
    }
    println!("{} suppressed", out.suppressed);
    Ok(())
}
