use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    InstanceTooLarge,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: negative active time {value}")]
    NegativeActiveTime { line: usize, value: f64 },

    #[error("duplicate article id `{id}` on lines {first} and {second}")]
    DuplicateArticle {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("article `{id}` has an empty body")]
    EmptyBody { id: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {what} `{id}`")]
    Unknown { what: &'static str, id: String },

    #[error("score matrix has no completed values; run factorization and merge first")]
    NotCompleted,

    #[error("factorization diverged at epoch {epoch} (cost {cost}); try a smaller learning rate")]
    Diverged { epoch: usize, cost: f64 },

    #[error("committee size {kappa} exceeds the {available} available {what}")]
    KappaTooLarge {
        kappa: usize,
        available: usize,
        what: &'static str,
    },

    #[error("committee has {actual} winners but kappa is {kappa}")]
    KappaMismatch { kappa: usize, actual: usize },

    #[error("instance too large for the exact solver ({reason}); use the greedy rule")]
    InstanceTooLarge { reason: String },

    #[error("reference bias undefined: {0}")]
    UndefinedReferenceBias(&'static str),

    #[error("no ideological evidence in set: both seed counts are zero")]
    NoIdeologicalEvidence,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Diverged { .. } | Error::NoIdeologicalEvidence => ErrorKind::Numerical,
            Error::UndefinedReferenceBias(_) => ErrorKind::Numerical,
            Error::InstanceTooLarge { .. } => ErrorKind::InstanceTooLarge,
            _ => ErrorKind::Input,
        }
    }
}
