//! Parses recorded tracking rows and turns them into frame batches.

use contact_alert::ingest::{
    direction_agreement, extract_given_velocity, parse_tracking_csv, records_to_batches, FieldBounds, Roster,
};

const PLAY: &str = "\
time,x,y,s,dis,dir,event,nflId,displayName,jerseyNumber,team,frame.id,gameId,playId
2017-09-08 00:44:06.9,50.00,26.70,2.0,0.20,90,NA,2543498,Eric Fisher,72,home,1,2017090700,68
2017-09-08 00:44:06.9,53.00,26.70,2.0,0.20,270,NA,2552315,Elandon Roberts,52,away,1,2017090700,68
2017-09-08 00:44:06.9,60.20,20.10,NA,NA,NA,NA,NA,football,NA,ball,1,2017090700,68
2017-09-08 00:44:07.0,50.20,26.70,2.0,0.20,90,ball_snap,2543498,Eric Fisher,72,home,2,2017090700,68
2017-09-08 00:44:07.0,52.80,26.70,2.0,0.20,270,NA,2552315,Elandon Roberts,52,away,2,2017090700,68
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let parsed = parse_tracking_csv(PLAY.as_bytes(), None, &FieldBounds::default())?;
    println!("{} rows, {} skipped", parsed.records.len(), parsed.skipped);
    for r in parsed.records.iter().filter(|r| r.frame_id == 1) {
        println!("{:>8} {:?} velocity {:?}", r.player_id, r.display_name, extract_given_velocity(r));
    }
    println!("dir convention agreement {:?}", direction_agreement(&parsed.records, 0.05));

    let roster = Roster::single_tag(["2543498", "2552315"])?;
    let (batches, dropped) = records_to_batches(&parsed.records, &roster, 0.1, false)?;
    println!("{} frames, {dropped} rows dropped", batches.len());
    Ok(())
}
