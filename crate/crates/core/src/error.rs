use thiserror::Error;

use crate::word::Word;

/// Errors raised by the core algorithms.
///
/// Every variant has a stable machine-readable code (see [`Error::code`])
/// that the CLI surfaces in reports and exit statuses.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown letter {letter:?} for rank {rank}")]
    UnknownLetter { letter: char, rank: usize },

    #[error("resource limit exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("all generators reduce to the identity")]
    TrivialSubgroup,

    #[error("subgroup has finite index, so its limit set is the whole boundary")]
    NotProper,

    #[error("the subgroup collection is empty")]
    EmptyCollection,

    #[error("subgroup index {index} out of range for a collection of {len}")]
    NoSuchSubgroup { index: usize, len: usize },

    #[error("the two cosets coincide")]
    CosetEqual,

    #[error(
        "collection is not almost malnormal: {element} lies in H{} and {g}·{element}·{g}⁻¹ in H{}",
        .i + 1,
        .j + 1
    )]
    NotMalnormal {
        g: Word,
        i: usize,
        j: usize,
        element: Word,
    },

    #[error("compact sets meet the excluded cylinder: {0}")]
    BadCompacts(String),

    #[error("point lies in the translated limit set {rep}·Λ(H{})", .subgroup + 1)]
    NotConicalCandidate { subgroup: usize, rep: Word },

    #[error("checked depth {checked_depth} too small to place {wanted} indices (placed {placed})")]
    Horizon {
        checked_depth: usize,
        wanted: usize,
        placed: usize,
    },

    #[error("R = {r} must exceed 2λ + 10δ = {bound}")]
    BadR { r: usize, bound: usize },

    #[error("depth {depth} must be at least the frontier ball radius {needed}")]
    DepthTooShallow { depth: usize, needed: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownLetter { .. } => "UNKNOWN_LETTER",
            Error::ResourceLimit { .. } => "RESOURCE_LIMIT",
            Error::InvalidGraph(_) => "INVALID_GRAPH",
            Error::TrivialSubgroup => "TRIVIAL_SUBGROUP",
            Error::NotProper => "NOT_PROPER",
            Error::EmptyCollection => "EMPTY_COLLECTION",
            Error::NoSuchSubgroup { .. } => "NO_SUCH_SUBGROUP",
            Error::CosetEqual => "COSET_EQUAL",
            Error::NotMalnormal { .. } => "NOT_MALNORMAL",
            Error::BadCompacts(_) => "BAD_COMPACTS",
            Error::NotConicalCandidate { .. } => "NOT_CONICAL_CANDIDATE",
            Error::Horizon { .. } => "HORIZON",
            Error::BadR { .. } => "BAD_R",
            Error::DepthTooShallow { .. } => "DEPTH_TOO_SHALLOW",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
