//! Error type shared across the crate.

/// Errors produced by solver components.
///
/// `InvalidInput` covers rejected arguments (wrong stencil widths, unsupported
/// parameters, malformed configurations). `BoundsViolation` signals that a
/// state escaped the prescribed solution bounds where the maximum-principle
/// machinery requires it to stay inside — typically an upstream CFL breach.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bounds violation: {0}")]
    BoundsViolation(String),

    #[error("corrupt coefficient data: {0}")]
    CorruptData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for `Error::InvalidInput` with formatted text.
#[macro_export]
macro_rules! invalid_input {
    ($($arg:tt)*) => {
        $crate::Error::InvalidInput(format!($($arg)*))
    };
}

/// Shorthand for `Error::BoundsViolation` with formatted text.
#[macro_export]
macro_rules! bounds_violation {
    ($($arg:tt)*) => {
        $crate::Error::BoundsViolation(format!($($arg)*))
    };
}
