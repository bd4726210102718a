use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] biphoton::Error),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("{0}")]
    Usage(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type CliResult<T> = Result<T, CliError>;
