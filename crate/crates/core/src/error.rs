use core::fmt;

use alloc::string::String;

/// Error type shared by the whole crate.
///
/// Most variants are signals in the protocol sense: they tell the caller to
/// refine an oracle, supply more digits, or that a requested construction is
/// outside the supported set. `BoundViolated` is different; it indicates an
/// implementation bug, since the inequality it guards is a theorem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A ball to be reduced modulo one contains an integer; refine and retry.
    StraddlesInteger,
    /// A digit-string oracle cannot meet the requested precision.
    DigitFileExhausted { available: usize, needed: usize },
    /// Digit extraction could not separate the value from a dyadic boundary
    /// within the configured precision cap.
    AmbiguousDigit { position: usize, cap: u32 },
    /// Oracle refinement cannot reach the requested precision.
    PrecisionUnreachable,
    /// Fewer zero digits than requested were found within the precision cap.
    ZeroDigitsExhausted { found: usize, requested: usize },
    /// The prefix has no tail-measure bound.
    NoTailBound,
    /// The prefix does not contain enough stages to certify the requested
    /// error.
    StagesExhausted { available: usize },
    /// A stage of a test enumeration exceeds its measure budget.
    PreconditionMeasure { stage: usize },
    /// A constructed set exceeds a bound that the theory guarantees.
    BoundViolated { context: &'static str },
    /// The grid for this index is too large to materialize.
    ///
    /// `bits` is the grid exponent `a(k)`: the grid has `2^bits + 1` points.
    GridInfeasible { k: u64, bits: u64, budget_bits: u64 },
    /// Rotation orbits require an irrational angle.
    RationalRotation,
    /// The operation needs monotonicity data the family does not provide.
    UnsupportedFamily(&'static str),
    /// A constructor rejected its arguments.
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::StraddlesInteger => write!(f, "ball straddles an integer; refine and retry"),
            Error::DigitFileExhausted { available, needed } => write!(
                f,
                "digit source exhausted: {available} digits available, {needed} needed"
            ),
            Error::AmbiguousDigit { position, cap } => write!(
                f,
                "digit {position} is ambiguous within the {cap}-bit precision cap"
            ),
            Error::PrecisionUnreachable => write!(f, "requested precision is unreachable"),
            Error::ZeroDigitsExhausted { found, requested } => write!(
                f,
                "only {found} zero digits found, {requested} requested"
            ),
            Error::NoTailBound => write!(f, "prefix carries no tail-measure bound"),
            Error::StagesExhausted { available } => write!(
                f,
                "prefix has only {available} stages, not enough for the requested error"
            ),
            Error::PreconditionMeasure { stage } => write!(
                f,
                "stage {stage} exceeds its measure budget"
            ),
            Error::BoundViolated { context } => write!(
                f,
                "guaranteed bound violated in {context} (implementation bug)"
            ),
            Error::GridInfeasible { k, bits, budget_bits } => write!(
                f,
                "grid for k = {k} has 2^{bits} + 1 points, beyond the 2^{budget_bits} budget"
            ),
            Error::RationalRotation => write!(f, "rotation by a rational angle is not ergodic"),
            Error::UnsupportedFamily(what) => write!(f, "unsupported family: {what}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
