use crate::config::ConfigError;
use crate::render::RenderError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] gmc_core::Error),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("unknown experiment '{name}'; accepted: {accepted}")]
    UnknownExperiment { name: String, accepted: String },
    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 0 success, 1 configuration or input error, 2 numerical failure
    /// (including outputs that do not replay), 3 resource guard.
    pub fn exit_code(&self) -> i32 {
        use gmc_core::Error as E;
        match self {
            CliError::Core(E::Resource(_)) => 3,
            CliError::Core(
                E::NotPositiveDefinite { .. }
                | E::QuadratureFailure { .. }
                | E::DegenerateNormalization(_)
                | E::BracketNotFound { .. },
            ) => 2,
            CliError::ReplayMismatch(_) => 2,
            _ => 1,
        }
    }
}
