use thiserror::Error;

/// Everything that can go wrong in the analyses.
///
/// Parse errors have their own type in [`crate::text`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid transducer: {0}")]
    InvalidTransducer(String),
    #[error("letter {0:?} is not in the input alphabet")]
    UnknownLetter(char),
    #[error("invalid run: {0}")]
    InvalidRun(String),
    #[error("run is not successful")]
    NotSuccessful,
    #[error("interval [{lo}, {hi}) is out of range (last position is {last})")]
    InvalidInterval { lo: usize, hi: usize, last: usize },
    #[error("interval [{lo}, {hi}) is not a loop of the run")]
    NotALoop { lo: usize, hi: usize },
    #[error("edges of the juxtaposition are not totally ordered")]
    NotTotallyOrdered,
    #[error("bound exceeded: more than {cap} {what}")]
    BoundExceeded { what: &'static str, cap: usize },
    #[error("run has an inversion")]
    HasInversion,
    #[error("pairs do not match: {0}")]
    MismatchedPair(String),
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error("factorization tree does not match: {0}")]
    TreeMismatch(String),
    #[error("transducer is not {k}-visit")]
    NotKVisit { k: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
