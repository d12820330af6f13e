use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("not a relation: signed sum of permutation characters is nonzero")]
    NotARelation,

    #[error("{set} is empty for d = {d}, p = {p}: every q = +-1 mod p splits in Q(sqrt({d}))")]
    EmptyPrimeSet { set: &'static str, d: i64, p: u64 },

    #[error("scan for {set} exhausted at bound {bound}: found {found} of {wanted} primes ({congruences})")]
    ScanExhausted {
        set: &'static str,
        found: usize,
        wanted: usize,
        bound: u64,
        congruences: String,
    },

    #[error("{what} exceeded its bound ({bound})")]
    BoundExceeded { what: String, bound: u64 },

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("degenerate pairing: {0}")]
    DegeneratePairing(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("unramified: character is trivial on every modulus factor")]
    Unramified,

    #[error("check `{check}` failed: {detail}")]
    CheckFailed { check: String, detail: String },

    #[error("certificate parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn check(check: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::CheckFailed {
            check: check.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by a resource bound rather than bad input or
    /// a failed check.
    pub fn is_resource_exhaustion(&self) -> bool {
        matches!(
            self,
            Error::ScanExhausted { .. } | Error::BoundExceeded { .. } | Error::SearchExhausted(_)
        )
    }

    pub fn is_input_rejection(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::EmptyPrimeSet { .. } | Error::Parse(_)
        )
    }
}
