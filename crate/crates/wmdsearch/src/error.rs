use std::path::PathBuf;

/// Errors raised while reading, writing or running anything file-backed.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {cause}", path.display())]
    Io {
        path: PathBuf,
        cause: std::io::Error,
    },
    /// A file does not follow its documented format.
    #[error("{}{}: {message}", path.display(), line_suffix(*line))]
    Format {
        path: PathBuf,
        /// 1-based line or entry number; 0 when not applicable.
        line: usize,
        message: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] wmdsearch_core::Error),
}

fn line_suffix(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(":{line}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause: source,
        }
    }

    pub(crate) fn format(
        path: impl Into<PathBuf>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
