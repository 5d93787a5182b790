use std::io;

/// Errors produced by the processing chain.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated an operation's preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No coherent arrival was found in the data.
    #[error("no arrival detected")]
    NoArrival,

    /// The adaptive partition ran out of sub-array sizes before every
    /// sub-array saw the source as far-field.
    #[error("source too close or array too coarse (best sub-array count tried: {best_k})")]
    SourceTooClose { best_k: usize },

    /// Triangulation rays are too close to parallel to intersect reliably.
    #[error("ill-conditioned triangulation (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    /// Triangulation placed the source behind the array plane.
    #[error("behind-array solution (z = {z:.6e} m)")]
    BehindArray { z: f64 },

    /// Scenario configuration could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// A grid file header could not be parsed.
    #[error("grid file parse error at line {line}: {message}")]
    GridParse { line: usize, message: String },

    /// A pipeline stage failed; wraps the underlying error with the stage name.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wrap this error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
