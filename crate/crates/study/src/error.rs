use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Core(#[from] trimext::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },

    #[error("{path}, line {line}: {message}")]
    Parse { path: String, line: u64, message: String },

    #[error("nothing to plot: {0}")]
    EmptyPlot(String),
}

pub type Result<T> = std::result::Result<T, StudyError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> StudyError + '_ {
    move |source| StudyError::Io { path: path.display().to_string(), source }
}
