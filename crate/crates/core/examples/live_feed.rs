//! Live mode over an in-memory feed; pager commands go to stdout.

use std::io::{self, Cursor};

use contact_alert::harness::{run_live_reader, write_ndjson, LiveOptions, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = Scenario::parse("duration = 4\nplayer.A = 0 0 0; 4 8 0\nplayer.B = 0 6 0.2; 4 -2 0.2\n")?;
    let mut feed = Vec::new();
    write_ndjson(&sc.generate().batches, &mut feed)?;
    feed.extend_from_slice(b"garbage line\n");

    let out = run_live_reader(Cursor::new(feed), io::stdout(), &LiveOptions::default())?;
    eprint!("{}", out.stats.render());
    Ok(())
}
