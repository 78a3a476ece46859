use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// Relative timing estimate at or beyond half a sample period.
    #[error("timing estimate diverged: |r| = {0} >= 0.5")]
    Divergence(f64),

    #[error("length {0} is not a power of two")]
    Size(usize),

    #[error("out of domain: {0}")]
    Domain(String),

    #[error("channel {channel}: {source}")]
    Channel {
        channel: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_channel(self, channel: usize) -> Self {
        Error::Channel {
            channel,
            source: Box::new(self),
        }
    }

    /// True for errors that originate from the input data rather than setup.
    pub fn is_estimator_failure(&self) -> bool {
        match self {
            Error::DegenerateSignal(_) | Error::Divergence(_) => true,
            Error::Channel { source, .. } => source.is_estimator_failure(),
            _ => false,
        }
    }
}
