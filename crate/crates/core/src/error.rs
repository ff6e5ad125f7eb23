use std::path::PathBuf;

use thiserror::Error;

/// Problems with a declarative experiment configuration or a strategy/policy spec.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config document: {0}")]
    Parse(String),
    #[error("unregistered strategy `{0}`")]
    UnknownStrategy(String),
    #[error("unregistered policy `{0}`")]
    UnknownPolicy(String),
    #[error("`{owner}` has no parameter `{key}`")]
    UnknownParam { owner: String, key: String },
    #[error("`{owner}.{key}` = {value}: {reason}")]
    InvalidParam {
        owner: String,
        key: String,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid environment: {0}")]
    InvalidEnv(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

/// A strategy or policy broke the game contract during play.
#[derive(Debug, Error)]
pub enum GameError {
    #[error("round {t}: strategy returned sample size {n_t} outside [1, {population}]")]
    SampleSize { t: usize, n_t: u32, population: u32 },
    #[error("round {t}: strategy reported {reported}, outside [0, 1]")]
    ReportRange { t: usize, reported: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cell {strategy} x {policy}, seed {seed}: {source}")]
    Trial {
        strategy: String,
        policy: String,
        seed: u64,
        #[source]
        source: GameError,
    },
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serializing results: {0}")]
    Serialize(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
