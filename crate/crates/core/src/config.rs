//! Predictor configuration and the `key = value` file dialect it is read from.

use std::path::Path;

use thiserror::Error;

use crate::model::{feet_to_yards, LengthUnit};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("threshold must be positive (got {0} yd)")]
    NonPositiveThreshold(f64),
    #[error("smoothing_weights must be non-negative and sum to 1 (got {0:?})")]
    WeightsNotNormalized([f64; 3]),
    #[error("hysteresis_factor must be > 1 (got {0})")]
    BadHysteresis(f64),
    #[error("match_tolerance must be >= 0 (got {0})")]
    NegativeTolerance(i64),
    #[error("sample_dt must be positive (got {0} s)")]
    NonPositiveDt(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { line: usize, key: String },
    #[error("cannot read config: {0}")]
    Io(String),
}

impl ConfigError {
    /// The config field this error refers to, for diagnostics.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            ConfigError::NonPositiveThreshold(_) => Some("threshold"),
            ConfigError::WeightsNotNormalized(_) => Some("smoothing_weights"),
            ConfigError::BadHysteresis(_) => Some("hysteresis_factor"),
            ConfigError::NegativeTolerance(_) => Some("match_tolerance"),
            ConfigError::NonPositiveDt(_) => Some("sample_dt"),
            _ => None,
        }
    }
}

/// How a player's velocity is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Finite difference of smoothed positions, constant speed between samples.
    #[default]
    ConstantSpeed,
    /// Speed and direction supplied by the data source, finite difference as fallback.
    GivenVelocity,
}

impl Estimator {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "constant_speed" | "ConstantSpeed" => Some(Estimator::ConstantSpeed),
            "given_velocity" | "GivenVelocity" => Some(Estimator::GivenVelocity),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::ConstantSpeed => "constant_speed",
            Estimator::GivenVelocity => "given_velocity",
        }
    }
}

/// Whether samples are smoothed per tag before fusing, or fused first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothingOrder {
    #[default]
    SmoothThenFuse,
    FuseThenSmooth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorConfig {
    /// Collision distance in yards.
    pub threshold: f64,
    /// Newest first.
    pub smoothing_weights: [f64; 3],
    /// Seconds per frame.
    pub sample_dt: f64,
    pub estimator: Estimator,
    pub smoothing_order: SmoothingOrder,
    /// Frames without a sample after which a player is excluded from prediction.
    pub max_staleness: u32,
    pub hysteresis_factor: f64,
    /// Frames an episode stays open at minimum.
    pub min_event_gap: u32,
    /// Frames of slack when matching predicted to actual events.
    pub match_tolerance: i64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self::pilot()
    }
}

impl PredictorConfig {
    /// Two-foot threshold used for walking/jogging participants.
    pub fn pilot() -> Self {
        Self {
            threshold: feet_to_yards(2.0),
            smoothing_weights: [0.5, 0.3, 0.2],
            sample_dt: 0.1,
            estimator: Estimator::ConstantSpeed,
            smoothing_order: SmoothingOrder::SmoothThenFuse,
            max_staleness: 3,
            hysteresis_factor: 1.5,
            min_event_gap: 5,
            match_tolerance: 5,
        }
    }

    /// Three-foot threshold for full-speed play.
    pub fn game() -> Self {
        Self {
            threshold: feet_to_yards(3.0),
            ..Self::pilot()
        }
    }

    /// Checks every invariant, reporting the first one violated.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(ConfigError::NonPositiveThreshold(self.threshold));
        }
        let w = self.smoothing_weights;
        let sum: f64 = w.iter().sum();
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::WeightsNotNormalized(w));
        }
        if !(self.hysteresis_factor > 1.0) || !self.hysteresis_factor.is_finite() {
            return Err(ConfigError::BadHysteresis(self.hysteresis_factor));
        }
        if self.match_tolerance < 0 {
            return Err(ConfigError::NegativeTolerance(self.match_tolerance));
        }
        if !(self.sample_dt > 0.0) || !self.sample_dt.is_finite() {
            return Err(ConfigError::NonPositiveDt(self.sample_dt));
        }
        Ok(())
    }
}

/// Pager dispatch settings, read from the same file as the predictor settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AlertConfig {
    /// Minimum seconds between two commands to the same player.
    pub refractory_s: f64,
    pub vibration_ms: u32,
    /// Page both players of a pair, or only the first.
    pub page_both: bool,
    /// Outbox capacity before the oldest command is dropped.
    pub outbox_capacity: usize,
}

impl Default for AlertConfig {
    fn default() -> Self {
        Self {
            refractory_s: 1.0,
            vibration_ms: 500,
            page_both: true,
            outbox_capacity: 256,
        }
    }
}

/// Everything a run reads from a config file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub predictor: PredictorConfig,
    pub alerts: AlertConfig,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| ConfigError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    /// Parses the `key = value` dialect. Unknown keys are an error, and the
    /// result is validated before being returned.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (line, key, value) in key_values(text)? {
            let p = &mut cfg.predictor;
            let bad = |msg: String| ConfigError::Parse { line, msg };
            match key {
                "profile" => {
                    let alerts = cfg.alerts.clone();
                    cfg.predictor = match value {
                        "pilot" => PredictorConfig::pilot(),
                        "game" => PredictorConfig::game(),
                        other => return Err(bad(format!("unknown profile `{other}`"))),
                    };
                    cfg.alerts = alerts;
                }
                "threshold" => p.threshold = parse_distance(value).map_err(bad)?,
                "smoothing_weights" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(bad("smoothing_weights needs three values".into()));
                    }
                    for (slot, s) in p.smoothing_weights.iter_mut().zip(parts) {
                        *slot = parse_f64(s).map_err(bad)?;
                    }
                }
                "sample_dt" => p.sample_dt = parse_seconds(value).map_err(bad)?,
                "estimator" => {
                    p.estimator = Estimator::parse(value)
                        .ok_or_else(|| bad(format!("unknown estimator `{value}`")))?
                }
                "smoothing_order" => {
                    p.smoothing_order = match value {
                        "smooth_then_fuse" => SmoothingOrder::SmoothThenFuse,
                        "fuse_then_smooth" => SmoothingOrder::FuseThenSmooth,
                        other => return Err(bad(format!("unknown smoothing_order `{other}`"))),
                    }
                }
                "max_staleness" => p.max_staleness = parse_int(value).map_err(bad)?,
                "hysteresis_factor" => p.hysteresis_factor = parse_f64(value).map_err(bad)?,
                "min_event_gap" => p.min_event_gap = parse_int(value).map_err(bad)?,
                "match_tolerance" => p.match_tolerance = parse_int(value).map_err(bad)?,
                "refractory" => cfg.alerts.refractory_s = parse_seconds(value).map_err(bad)?,
                "vibration_ms" => cfg.alerts.vibration_ms = parse_int(value).map_err(bad)?,
                "page_both" => {
                    cfg.alerts.page_both = value
                        .parse()
                        .map_err(|_| bad(format!("expected true/false, got `{value}`")))?
                }
                "outbox_capacity" => cfg.alerts.outbox_capacity = parse_int(value).map_err(bad)?,
                other => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: other.to_owned(),
                    })
                }
            }
        }
        cfg.predictor.validate()?;
        Ok(cfg)
    }
}

/// Splits a `key = value` document into `(line number, key, value)` triples.
/// `#` starts a comment anywhere on a line; blank lines are skipped.
pub fn key_values(text: &str) -> Result<Vec<(usize, &str, &str)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            });
        };
        out.push((line, k.trim(), v.trim()));
    }
    Ok(out)
}

pub(crate) fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("expected a number, got `{s}`"))
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse::<T>()
        .map_err(|_| format!("expected an integer, got `{s}`"))
}

/// Accepts `2 ft`, `0.5yd`, or a bare number (yards).
pub fn parse_distance(s: &str) -> Result<f64, String> {
    let s = s.trim();
    for (suffix, unit) in [("ft", LengthUnit::Feet), ("yd", LengthUnit::Yards)] {
        if let Some(num) = s.strip_suffix(suffix) {
            return Ok(unit.to_yards(parse_f64(num)?));
        }
    }
    parse_f64(s)
}

fn parse_seconds(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some(num) = s.strip_suffix("ms") {
        return Ok(parse_f64(num)? / 1000.0);
    }
    parse_f64(s.strip_suffix('s').unwrap_or(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pilot_profile_is_valid() {
        let c = PredictorConfig::pilot();
        assert!(c.validate().is_ok());
        assert!((c.threshold - 0.6667).abs() < 1e-4);
        assert_eq!(c.smoothing_weights, [0.5, 0.3, 0.2]);
        assert_eq!(c.sample_dt, 0.1);
        assert_eq!(PredictorConfig::game().threshold, 1.0);
    }

    #[test]
    fn rejects_unnormalized_weights() {
        let c = PredictorConfig {
            smoothing_weights: [0.5, 0.5, 0.5],
            ..PredictorConfig::pilot()
        };
        assert_eq!(
            c.validate(),
            Err(ConfigError::WeightsNotNormalized([0.5, 0.5, 0.5]))
        );
    }

    #[test]
    fn rejects_negative_threshold() {
        let c = PredictorConfig {
            threshold: -1.0,
            ..PredictorConfig::pilot()
        };
        assert_eq!(c.validate(), Err(ConfigError::NonPositiveThreshold(-1.0)));
        assert_eq!(c.validate().unwrap_err().field(), Some("threshold"));
    }

    #[test]
    fn first_violation_wins() {
        let c = PredictorConfig {
            threshold: 0.0,
            hysteresis_factor: 1.0,
            match_tolerance: -1,
            ..PredictorConfig::pilot()
        };
        assert!(matches!(
            c.validate(),
            Err(ConfigError::NonPositiveThreshold(_))
        ));
        let c = PredictorConfig {
            hysteresis_factor: 1.0,
            match_tolerance: -1,
            ..PredictorConfig::pilot()
        };
        assert!(matches!(c.validate(), Err(ConfigError::BadHysteresis(_))));
        let c = PredictorConfig {
            match_tolerance: -1,
            ..PredictorConfig::pilot()
        };
        assert!(matches!(c.validate(), Err(ConfigError::NegativeTolerance(-1))));
    }

    #[test]
    fn parses_config_file() {
        let text = "\
# game day
profile = game
threshold = 2 ft   # override
smoothing_weights = 0.6, 0.3, 0.1
estimator = given_velocity
max_staleness = 4
refractory = 1500ms
";
        let cfg = RunConfig::parse(text).unwrap();
        assert!((cfg.predictor.threshold - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cfg.predictor.smoothing_weights, [0.6, 0.3, 0.1]);
        assert_eq!(cfg.predictor.estimator, Estimator::GivenVelocity);
        assert_eq!(cfg.predictor.max_staleness, 4);
        assert_eq!(cfg.alerts.refractory_s, 1.5);
    }

    #[test]
    fn distance_units() {
        assert_eq!(parse_distance("3 ft").unwrap(), 1.0);
        assert_eq!(parse_distance("0.5yd").unwrap(), 0.5);
        assert_eq!(parse_distance("0.25").unwrap(), 0.25);
        assert!(parse_distance("two feet").is_err());
    }

    #[test]
    fn config_file_errors_name_the_problem() {
        assert!(matches!(
            RunConfig::parse("threshold = -1 yd"),
            Err(ConfigError::NonPositiveThreshold(_))
        ));
        assert!(matches!(
            RunConfig::parse("speed = 3"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("\nthreshold"),
            Err(ConfigError::Parse { line: 2, .. })
        ));
    }
}
