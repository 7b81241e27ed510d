use std::fmt;

use chainproof::Error;

/// Process exit status, also used as the error kind in structured output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Internal = 1,
    Usage = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn name(self) -> &'static str {
        match self {
            ExitKind::Internal => "internal",
            ExitKind::Usage => "usage",
            ExitKind::Io => "io",
            ExitKind::Parse => "parse",
            ExitKind::Validation => "validation",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Usage, message)
    }

    /// Errors raised while turning a model file into a chain: unknown
    /// labels are a defect of the file, not of the command line.
    pub fn from_model(err: Error) -> Self {
        let kind = match &err {
            Error::Parse(_) | Error::InvalidNumber(_) => ExitKind::Parse,
            Error::UnknownState(_) => ExitKind::Validation,
            _ => kind_of(&err),
        };
        CliError::new(kind, err.to_string())
    }
}

fn kind_of(err: &Error) -> ExitKind {
    match err {
        Error::EmptyStateSpace
        | Error::DuplicateState(_)
        | Error::NegativeProbability(..)
        | Error::RowSumNotOne(..)
        | Error::NegativeCost(..)
        | Error::NonFinite(..)
        | Error::DuplicateEntry(..) => ExitKind::Validation,
        Error::Parse(_) => ExitKind::Parse,
        Error::UnknownState(_)
        | Error::InvalidNumber(_)
        | Error::StartInTarget(_)
        | Error::InvalidParams(_)
        | Error::IndexOutOfRange { .. }
        | Error::NotHonestJondo(_)
        | Error::InvalidConfig(_)
        | Error::ConditionHasZeroProbability => ExitKind::Usage,
        Error::SingularSystem | Error::InvalidDistribution(_) | Error::NoDecidedSamples => ExitKind::Internal,
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::new(kind_of(&err), err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind.name(), self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;
