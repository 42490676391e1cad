use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size mismatch in {context}: expected {expected}, found {found}")]
    SizeMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("singular matrix in {context} (pivot {pivot:e} at column {column})")]
    SingularMatrix {
        context: &'static str,
        column: usize,
        pivot: f64,
    },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e}, target {target:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::SizeMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
