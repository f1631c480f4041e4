use thiserror::Error;

/// Errors raised by lattice construction, simulation and certification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions {rows}x{cols}: both must be at least 1")]
    InvalidDimensions { rows: i64, cols: i64 },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("operation requires a {expected} lattice, got {found}")]
    WrongLatticeKind { expected: &'static str, found: &'static str },

    #[error("site {site} out of range for {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },

    #[error("{requested} qubits exceeds the state-vector cap of {cap}")]
    QubitCapExceeded { requested: usize, cap: usize },

    #[error("partition-function enumeration over {requested} spins exceeds the cap of {cap}")]
    EnumerationCapExceeded { requested: usize, cap: usize },

    #[error("bitstring has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("malformed bitstring {0:?}")]
    MalformedBitstring(String),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("site {0} appears more than once in a gate")]
    SiteCollision(usize),

    #[error("postselected branch has zero probability")]
    ZeroProbabilityBranch,

    #[error("distribution is not normalized: total {total}")]
    NotNormalized { total: f64 },

    #[error("negative probability {value} at outcome {outcome}")]
    NegativeProbability { outcome: u64, value: f64 },

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site {site} has degree {degree}, field absorption handles degrees 1 to 3")]
    UnsupportedDegree { site: usize, degree: usize },

    #[error("missing angle for site {0}")]
    MissingAngle(usize),

    #[error("no measurement records for term {0}")]
    EmptyRecords(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
