//! Whole-pipeline runs: file replay, live feeds and scripted scenarios.

mod engine;
pub mod live;
pub mod replay;
pub mod scenario;
mod stats;

pub use engine::Engine;
pub use live::{run_live, run_live_reader, FeedSource, LiveOptions, LiveOutput};
pub use replay::{load_input, replay, InputFormat, ReplayInput, ReplayOutput, Speed};
pub use scenario::{write_ndjson, write_scenario_csv, Route, Scenario, ScenarioError, Synthesized};
pub use stats::RunStats;
