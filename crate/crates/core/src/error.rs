use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("tickers missing from price data: {}", .0.join(", "))]
    MissingTickers(Vec<String>),

    #[error("price panel is empty for the requested window")]
    EmptyPanel,

    #[error("universe is empty")]
    EmptyUniverse,

    #[error("insufficient data for {what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("panel has unfilled gaps for ticker {0}")]
    IncompletePanel(String),

    #[error("{0}")]
    Domain(String),

    #[error("ticker {0} has zero variance")]
    DegenerateAsset(String),

    #[error("{0}")]
    Alignment(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("annual risk must be positive to compute a Sharpe ratio, got {0}")]
    ZeroRisk(f64),

    #[error("frontier cloud is empty")]
    EmptyCloud,

    #[error("frontier sample {0} has zero risk")]
    DegenerateSample(usize),

    #[error("no sector results to summarize")]
    EmptySummary,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}

/// Attaches a pipeline stage name to an error.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| Error::Stage {
            stage,
            source: Box::new(source),
        })
    }
}
