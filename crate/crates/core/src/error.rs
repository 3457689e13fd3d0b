//! Error type shared by all modules of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// A system needs at least two maps; one map alone generates no gaps.
    #[error("a system needs at least two maps, got {0}")]
    TooFewMaps(usize),

    /// A single map violates its own invariants (monotonicity, range,
    /// coefficient constraints).
    #[error("invalid map: {0}")]
    BadMap(String),

    /// The images of consecutive maps overlap or leave [0, 1].
    #[error("map images are not increasingly ordered: {0}")]
    OrderingViolation(String),

    /// The map images tile all of [0, 1]; such a system has an empty gap
    /// structure and a trivial attractor complement.
    #[error("map images cover [0, 1] with no slack; the attractor would have no gaps")]
    CoverViolation,

    /// A map's contraction bound is not below one.
    #[error("map is not a contraction (Lipschitz bound {bound})")]
    NotContractive { bound: f64 },

    #[error("digit {digit} out of range 0..={max}")]
    DigitOutOfRange { digit: u8, max: u8 },

    /// A value passed to an inverse lies outside the map's image.
    #[error("value {value} lies outside the image of the map")]
    OutOfImage { value: f64 },

    /// An enumeration would produce more items than the safety cap allows.
    #[error("{what} at depth {depth} would exceed the cap of {cap} items")]
    DepthTooLarge {
        what: &'static str,
        depth: usize,
        cap: usize,
    },

    #[error("point {0} lies outside [0, 1]")]
    DomainError(f64),

    /// A point that should lie on (or within tolerance of) the attractor
    /// does not.
    #[error("point {0} is not within tolerance of the attractor")]
    NotInAttractor(f64),

    /// Shifting a truncated address with an empty prefix would have to
    /// invent digits.
    #[error("cannot shift a truncated address with an empty prefix")]
    EmptyTruncated,

    /// The operation needs a fully determined address, not a truncated one.
    #[error("operation requires an exact tail, got a truncated address")]
    TruncatedAddress,

    /// Gap addresses must end in a digit below the top one.
    #[error("the last digit of a gap address must be below the top digit {max}")]
    LastDigitIsN { max: u8 },

    #[error("cannot parse address: {0}")]
    AddressParse(String),

    #[error("invalid probability vector: {0}")]
    BadProbability(String),

    #[error("invalid weights: {0}")]
    BadWeights(String),

    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Solutions combined in one expression must share a system.
    #[error("solutions are built over different systems")]
    MixedSystems,

    /// Probability vectors in a family must be pairwise distinct.
    #[error("probability vectors must be pairwise distinct")]
    DuplicateVectors,

    /// The two vectors of a singularity probe must differ.
    #[error("the probability vectors are equal; nothing to separate")]
    VectorsEqual,

    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
}
