use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("world too small: {width}x{height} (minimum 12x12)")]
    WorldTooSmall { width: usize, height: usize },

    #[error("no spawn cell: world has no open cells")]
    NoSpawnCell,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid neuron count {0}: must be a power of two >= 32")]
    InvalidNeuronCount(usize),

    #[error("corrupt genotype: {0}")]
    CorruptGenotype(String),

    #[error("genotype size mismatch: {0} vs {1} neurons")]
    SizeMismatch(usize, usize),

    #[error("member {index}: {source}")]
    Member {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid population: {0}")]
    Population(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
