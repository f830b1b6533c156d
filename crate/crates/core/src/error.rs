use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("cannot parse value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("need at least one {0}")]
    Empty(&'static str),
    #[error("area of {area} m² cannot host {agents} agents at distinct positions")]
    AreaTooSmall { area: f64, agents: usize },
    #[error("{what} {id} at {x},{y} lies outside the area")]
    OutOfBounds { what: &'static str, id: u32, x: f64, y: f64 },
    #[error("duplicate id {0}")]
    DuplicateId(u32),
}

/// A scenario file that could not be read. `line` is 1-based.
#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot write to {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid plan: {0}")]
    Plan(String),
}
