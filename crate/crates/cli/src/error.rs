use thiserror::Error;

use crate::output::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] slewind::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot encode output: {0}")]
    Encode(String),
    /// Some checks of a verification run failed.
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    /// The request is well-formed but has no evaluable formula; the report
    /// still describes it.
    #[error("the Green's function of {points} points is not implemented")]
    NotImplemented { points: usize, report: Box<Report> },
}

impl CliError {
    /// 2 for bad input, 3 for numerical trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Verification(_) => 3,
            _ => 2,
        }
    }
}
