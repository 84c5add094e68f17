use prefrank::bench::BenchError;
use prefrank::exact::ExactError;
use prefrank::oracle::OracleError;

/// Why a command stopped, mapped onto the process exit status.
#[derive(Debug)]
pub enum Fail {
    /// Bad arguments or input files (exit 1).
    Validation(anyhow::Error),
    /// A checked mathematical identity or bound did not hold (exit 2).
    Violation(String),
    /// A configured size or work limit was exceeded (exit 3).
    Limit(String),
}

impl Fail {
    pub fn code(&self) -> u8 {
        match self {
            Fail::Validation(_) => 1,
            Fail::Violation(_) => 2,
            Fail::Limit(_) => 3,
        }
    }
}

impl std::fmt::Display for Fail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fail::Validation(e) => write!(f, "error: {e:#}"),
            Fail::Violation(m) => write!(f, "violation: {m}"),
            Fail::Limit(m) => write!(f, "limit exceeded: {m}"),
        }
    }
}

fn is_limit(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<ExactError>(), Some(ExactError::TooLarge { .. }))
            || matches!(c.downcast_ref::<OracleError>(), Some(OracleError::TooLarge { .. }))
            || matches!(
                c.downcast_ref::<OracleError>(),
                Some(OracleError::Exact(ExactError::TooLarge { .. }))
            )
            || matches!(c.downcast_ref::<BenchError>(), Some(BenchError::ComparisonCap { .. }))
    })
}

fn is_identity(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<ExactError>(), Some(ExactError::IdentityMismatch { .. }))
            || matches!(
                c.downcast_ref::<OracleError>(),
                Some(OracleError::Exact(ExactError::IdentityMismatch { .. }))
            )
    })
}

impl From<anyhow::Error> for Fail {
    fn from(e: anyhow::Error) -> Self {
        if is_limit(&e) {
            Fail::Limit(format!("{e:#}"))
        } else if is_identity(&e) {
            Fail::Violation(format!("{e:#}"))
        } else {
            Fail::Validation(e)
        }
    }
}

macro_rules! from_lib {
    ($($t:ty),*) => {
        $(impl From<$t> for Fail {
            fn from(e: $t) -> Self {
                anyhow::Error::from(e).into()
            }
        })*
    };
}

from_lib!(
    ExactError,
    OracleError,
    BenchError,
    prefrank::IoError,
    prefrank::CoreError,
    prefrank::LossError,
    prefrank::qsrank::RankError,
    std::io::Error
);

pub type Outcome<T> = Result<T, Fail>;
