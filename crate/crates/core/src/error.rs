use core::fmt;

/// Internal consistency failures. Seeing one of these means the engine state is
/// corrupt and the run should stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    /// The dirt total crossed the dirty threshold but no level passed the
    /// half-critical test.
    NoHalfCriticalLevel,
    /// A ledger quantity went negative.
    NegativeLedger,
    /// More local-rise roots in one set cover update than the analysis allows.
    TooManyRiseRoots,
    /// The greedy bucket pointer had to move up.
    BucketPointerRegressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    InvalidParams(&'static str),
    /// A count of zero was passed where a ratio level is required.
    ZeroCount,
    /// A level outside the precomputed power table.
    LevelOutOfRange(i32),
    UnknownElement(u32),
    AlreadyActive(u32),
    NotActive(u32),
    /// Some element cannot be covered by any set.
    Uncoverable(u32),
    UnknownVertex(u32),
    SelfLoop(u32),
    DuplicateEdge(u32, u32),
    MissingEdge(u32, u32),
    DegreeExceeded {
        vertex: u32,
        max_degree: u32,
    },
    /// The exhaustive optimum was asked for an instance with too many sets.
    TooManySets {
        sets: usize,
        limit: usize,
    },
    Fault(FaultKind),
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FaultKind::NoHalfCriticalLevel => "dirty cover without a half-critical level",
            FaultKind::NegativeLedger => "ledger value went negative",
            FaultKind::TooManyRiseRoots => "more than one local-rise root in a set cover update",
            FaultKind::BucketPointerRegressed => "greedy bucket pointer moved up",
        };
        f.write_str(s)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(why) => write!(f, "invalid parameters: {why}"),
            Error::ZeroCount => f.write_str("ratio level of an empty count"),
            Error::LevelOutOfRange(j) => write!(f, "level {j} outside the power table"),
            Error::UnknownElement(e) => write!(f, "unknown element {e}"),
            Error::AlreadyActive(e) => write!(f, "element {e} is already present"),
            Error::NotActive(e) => write!(f, "element {e} is not present"),
            Error::Uncoverable(e) => write!(f, "element {e} is not contained in any set"),
            Error::UnknownVertex(v) => write!(f, "unknown vertex {v}"),
            Error::SelfLoop(v) => write!(f, "self loop on vertex {v}"),
            Error::DuplicateEdge(u, v) => write!(f, "edge ({u}, {v}) already present"),
            Error::MissingEdge(u, v) => write!(f, "edge ({u}, {v}) not present"),
            Error::DegreeExceeded { vertex, max_degree } => {
                write!(f, "vertex {vertex} would exceed max degree {max_degree}")
            }
            Error::TooManySets { sets, limit } => {
                write!(f, "{sets} sets is above the exhaustive search limit of {limit}")
            }
            Error::Fault(k) => write!(f, "internal fault: {k}"),
        }
    }
}

impl core::error::Error for Error {}
