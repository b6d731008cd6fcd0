use std::path::Path;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Lib(#[from] foldkit::Error),

    /// The command ran but its result misses the requested tolerance.
    #[error("{0}")]
    ToleranceMiss(String),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Wraps a library error raised while reading or writing `path`.
    pub fn at(path: impl AsRef<Path>, err: foldkit::Error) -> Self {
        match err {
            foldkit::Error::Io(source) => CliError::io(path, source),
            other if other.is_io() => CliError::Io {
                path: path.as_ref().display().to_string(),
                source: std::io::Error::other(other.to_string()),
            },
            other => CliError::Input(format!("{}: {other}", path.as_ref().display())),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::ToleranceMiss(_) => 1,
            CliError::Input(_) => 2,
            CliError::Lib(e) if e.is_io() => 4,
            CliError::Lib(e) if e.is_numeric() => 3,
            CliError::Lib(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}
