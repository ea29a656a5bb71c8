use std::fmt;
use std::process::ExitCode;

/// A failed command. Usage errors cover bad flags, configs and inputs the
/// user has to fix before rerunning; everything else is operational.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Self::Usage(msg.to_string())
    }

    pub fn failed(msg: impl fmt::Display) -> Self {
        Self::Failed(msg.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Usage(_) => ExitCode::from(2),
            Self::Failed(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Failed(m) => f.write_str(m),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

impl From<darijakit_core::dataset::DatasetError> for CliError {
    fn from(e: darijakit_core::dataset::DatasetError) -> Self {
        use darijakit_core::dataset::DatasetError as D;
        match e {
            D::InvalidRatios(_) | D::InvalidMix(_) => Self::usage(e),
            _ => Self::failed(e),
        }
    }
}

impl From<darijakit_bench::BenchError> for CliError {
    fn from(e: darijakit_bench::BenchError) -> Self {
        use darijakit_bench::BenchError as B;
        match e {
            B::InvalidAdapter(_) | B::InvalidConfig(_) => Self::usage(e),
            _ => Self::failed(e),
        }
    }
}

impl From<darijakit_review::ReviewError> for CliError {
    fn from(e: darijakit_review::ReviewError) -> Self {
        use darijakit_review::ReviewError as R;
        match e {
            R::InvalidReviewer => Self::usage(e),
            _ => Self::failed(e),
        }
    }
}

impl From<darijakit_pseudolabel::BatchError> for CliError {
    fn from(e: darijakit_pseudolabel::BatchError) -> Self {
        match e {
            darijakit_pseudolabel::BatchError::Untrusted => Self::usage(e),
            _ => Self::failed(e),
        }
    }
}
