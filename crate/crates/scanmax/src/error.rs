use std::path::PathBuf;

/// Errors raised by the harness, file formats and CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] scanmax_core::Error),
    #[error("replication {index}: {source}")]
    Replication {
        index: u64,
        #[source]
        source: scanmax_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("tolerance violated: {0}")]
    Tolerance(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    ///
    /// 1 for I/O, 2 for domain/argument/parse/manifest problems, 3 when a
    /// convergence budget ran out, 4 when a run completed but failed a
    /// requested tolerance.
    pub fn exit_code(&self) -> i32 {
        use scanmax_core::Error as C;
        match self {
            Error::Core(e) | Error::Replication { source: e, .. } => match e {
                C::Domain(_) | C::Argument(_) => 2,
                C::Budget(_) => 3,
            },
            Error::Io { .. } => 1,
            Error::Parse { .. } | Error::Manifest(_) => 2,
            Error::Tolerance(_) => 4,
        }
    }
}
