use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use contact_alert::error::Result;
use contact_alert::evaluation::{match_events, summarize, IncidentTable};
use contact_alert::eventlog::{read_event_log, write_event_log};
use contact_alert::harness::{
    load_input, replay, run_live, write_ndjson, write_scenario_csv, LiveOptions, Scenario, Speed,
};
use contact_alert::ingest::Roster;
use contact_alert::RunConfig;

#[derive(Parser)]
#[command(name = "contact-alert", version, about = "Predict player contacts from tag tracking data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a tracking CSV or tag feed file and score it against ground truth.
    Replay {
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// `max`, or a real-time factor such as `1x` or `2x`.
        #[arg(long, default_value = "max")]
        speed: Speed,
        /// Write the match report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        roster: Option<PathBuf>,
        /// Write the event log here instead of stdout.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Read a live tag feed and send pager commands.
    Live {
        /// `-`, `file:PATH` or `tcp:HOST:PORT`.
        #[arg(long)]
        feed: String,
        /// `stdout`, `file:PATH`, `serial:DEVICE` or `tcp:HOST:PORT`.
        #[arg(long)]
        sink: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        roster: Option<PathBuf>,
        #[arg(long)]
        events: Option<PathBuf>,
        /// Reconnect attempts for TCP feeds.
        #[arg(long, default_value_t = 5)]
        retries: u32,
    },
    /// Generate tracking data from a scenario file.
    Synth {
        spec: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Match predicted events against actual events.
    Evaluate {
        #[arg(long, required_unless_present = "fixture", requires = "actual")]
        predicted: Option<PathBuf>,
        #[arg(long, requires = "predicted")]
        actual: Option<PathBuf>,
        /// Incident table with one frame column per variant.
        #[arg(long, conflicts_with_all = ["predicted", "actual"])]
        fixture: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        tolerance: i64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Ndjson,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn load_roster(path: Option<&Path>) -> Result<Option<Roster>> {
    path.map(|p| Ok(Roster::from_csv(File::open(p)?)?)).transpose()
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Replay {
            data,
            config,
            speed,
            report,
            roster,
            events,
        } => {
            let cfg = load_config(config.as_deref())?;
            let input = load_input(&data, load_roster(roster.as_deref())?, &cfg)?;
            let out = replay(input, &cfg, speed)?;
            let mut w = output(events.as_deref())?;
            write_event_log(&out.events, &mut w)?;
            w.flush()?;
            if let Some(p) = report {
                std::fs::write(p, summarize(&[("predicted", &out.report)]))?;
            }
            eprint!("{}", out.stats.render());
        }
        Command::Live {
            feed,
            sink,
            config,
            roster,
            events,
            retries,
        } => {
            let opts = LiveOptions {
                config: load_config(config.as_deref())?,
                roster: load_roster(roster.as_deref())?,
                retry_limit: retries,
                ..Default::default()
            };
            let out = run_live(&feed, &sink, &opts)?;
            if let Some(p) = events {
                write_event_log(&out.events, BufWriter::new(File::create(p)?))?;
            }
            eprint!("{}", out.stats.render());
        }
        Command::Synth {
            spec,
            output: out_path,
            format,
            seed,
        } => {
            let mut scenario = Scenario::load(&spec)?;
            if let Some(s) = seed {
                scenario = scenario.with_seed(s);
            }
            let format = format.unwrap_or(match out_path.extension().and_then(|e| e.to_str()) {
                Some("csv") => Format::Csv,
                _ => Format::Ndjson,
            });
            let synth = scenario.generate();
            let w = BufWriter::new(File::create(&out_path)?);
            match format {
                Format::Csv => write_scenario_csv(&scenario, &synth, w)?,
                Format::Ndjson => write_ndjson(&synth.batches, w)?,
            }
        }
        Command::Evaluate {
            predicted,
            actual,
            fixture,
            tolerance,
        } => {
            let text = if let Some(f) = fixture {
                let table = IncidentTable::from_csv(File::open(f)?, RunConfig::default().predictor.sample_dt)?;
                let reports = table.evaluate(tolerance);
                let named: Vec<(&str, _)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
                summarize(&named)
            } else {
                let (Some(p), Some(a)) = (predicted, actual) else {
                    unreachable!("clap enforces --predicted with --actual");
                };
                let pred = read_event_log(File::open(p)?)?;
                let act = read_event_log(File::open(a)?)?;
                summarize(&[("predicted", &match_events(&pred, &act, tolerance))])
            };
            print!("{text}");
        }
    }
    Ok(())
}
