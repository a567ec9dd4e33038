use alloc::string::String;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs are individually valid but inconsistent with each other.
    #[error("argument error: {0}")]
    Argument(String),
    /// A series or quadrature needed more work than its budget allows.
    #[error("convergence budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! argument {
    ($($arg:tt)*) => { $crate::Error::Argument(alloc::format!($($arg)*)) };
}
macro_rules! budget {
    ($($arg:tt)*) => { $crate::Error::Budget(alloc::format!($($arg)*)) };
}
pub(crate) use {argument, budget, domain};
