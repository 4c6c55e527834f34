use std::fmt;
use std::path::PathBuf;

use newsfair_core::ErrorKind;

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Synth,
    Ingest,
    Score,
    Factorize,
    Elect,
    Lexicon,
    Label,
    Evaluate,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Score => "score",
            Stage::Factorize => "factorize",
            Stage::Elect => "elect",
            Stage::Lexicon => "lexicon",
            Stage::Label => "label",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Core(#[from] newsfair_core::Error),

    /// A core error about a particular file or rule.
    #[error("{context}: {source}")]
    Data {
        context: String,
        source: newsfair_core::Error,
    },

    #[error("missing {}; run the `{prior}` stage first", path.display())]
    MissingArtifact { path: PathBuf, prior: Stage },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Config(String),
}

/// A failure tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {failure}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub failure: Failure,
}

impl StageError {
    pub fn new(stage: Stage, failure: impl Into<Failure>) -> Self {
        Self {
            stage,
            failure: failure.into(),
        }
    }

    /// 1 for bad input, 2 for numerical failure, 3 for an instance too large
    /// for an exact solver.
    pub fn exit_code(&self) -> i32 {
        match &self.failure {
            Failure::Core(e) | Failure::Data { source: e, .. } => match e.kind() {
                ErrorKind::Input => 1,
                ErrorKind::Numerical => 2,
                ErrorKind::InstanceTooLarge => 3,
            },
            _ => 1,
        }
    }
}
