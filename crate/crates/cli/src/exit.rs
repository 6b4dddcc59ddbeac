//! Exit-code taxonomy: 0 success, 1 configuration, 2 numeric divergence,
//! 3 I/O or data.

use cicf_core::trainers::TrainError;
use cicf_core::Error;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Train(TrainError),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        CliError::Train(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Train(e) => write!(f, "{e}"),
        }
    }
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Shape(_) | Error::Domain(_) | Error::Allocation(_) => 1,
        Error::Numeric(_) => 2,
        Error::Io(_) | Error::Csv(_) | Error::Data(_) | Error::Json(_) => 3,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => code_for(e),
            CliError::Train(TrainError::Diverged { .. }) => 2,
            CliError::Train(TrainError::Core(e)) => code_for(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxonomy() {
        assert_eq!(CliError::Core(Error::Config("x".into())).exit_code(), 1);
        assert_eq!(CliError::Core(Error::Numeric("x".into())).exit_code(), 2);
        assert_eq!(
            CliError::Core(Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "x"))).exit_code(),
            3
        );
        assert_eq!(CliError::Core(Error::Data("x".into())).exit_code(), 3);
    }
}
