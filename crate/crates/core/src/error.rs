use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("fixed-point overflow: value does not fit {int_bits} integer and {width} fractional bits")]
    FixedOverflow { width: u32, int_bits: u32 },
    #[error("fixed-point subtraction underflow")]
    SubUnderflow,
    #[error("fixed-point width mismatch: {0} vs {1}")]
    WidthMismatch(u32, u32),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("division by zero")]
    DivideByZero,
    #[error("square root of a negative value")]
    NegativeSqrt,
    #[error("exponent {0} outside the representable range")]
    ExponentRange(i64),
    #[error("invalid encoding: {0}")]
    InvalidEncoding(String),
    #[error("singular system: zero pivot at row {0}")]
    Singular(usize),
    #[error("undefined power: {0}")]
    UndefinedPower(&'static str),
    #[error("operands have mixed signs or are zero")]
    MixedSigns,
    #[error("eigen-solver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
