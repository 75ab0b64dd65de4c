use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid {what}: {}", problems.join("; "))]
    Schema {
        what: &'static str,
        problems: Vec<String>,
    },
    #[error("{}: malformed run file at line {line}: {message}", path.display())]
    RunFile {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Sim(#[from] railodm_core::sim::SimError),
    #[error(transparent)]
    Classifier(#[from] railodm_core::classifier::ClassifierError),
    #[error(transparent)]
    Eval(#[from] railodm_core::eval::EvalError),
    #[error("{0}")]
    Mismatch(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
