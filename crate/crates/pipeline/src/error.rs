use std::path::PathBuf;

use visrec_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("stage `{stage}` needs the output of `{required}`; run `visrec {required}` first")]
    Dependency {
        stage: &'static str,
        required: &'static str,
    },
    #[error("stage `{stage}` has stale cached output ({detail}); rerun with --force to rebuild")]
    StaleCache { stage: String, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: u8 = 0;
    /// Command-line usage errors, as reported by the argument parser.
    pub const USAGE: u8 = 2;
    pub const CONFIG: u8 = 3;
    pub const DEPENDENCY: u8 = 4;
    pub const STALE_CACHE: u8 = 5;
    pub const IO: u8 = 6;
    pub const DATA: u8 = 7;
    pub const NUMERICAL: u8 = 8;
}

impl PipelineError {
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Config(_) => exit::CONFIG,
            PipelineError::Dependency { .. } => exit::DEPENDENCY,
            PipelineError::StaleCache { .. } => exit::STALE_CACHE,
            PipelineError::Io { .. } => exit::IO,
            PipelineError::Manifest { .. } => exit::DATA,
            PipelineError::Core { source, .. } => match source {
                CoreError::Io(_) => exit::IO,
                CoreError::Parameter(_) => exit::CONFIG,
                CoreError::Singular(_) | CoreError::Divergence { .. } => exit::NUMERICAL,
                _ => exit::DATA,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| PipelineError::Io { path, source }
    }
}

/// Attaches context to core results.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, CoreError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| PipelineError::Core {
            context: what(),
            source,
        })
    }
}
