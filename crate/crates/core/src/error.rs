use thiserror::Error;

use crate::codec::DecodeError;

/// The user-side check that rejected an issuance response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IssueStage {
    /// The KGC's proof of knowledge did not verify.
    Proof,
    /// `B3`/`B4` failed the pairing consistency checks.
    Pairing,
    /// The assembled key failed key verification.
    KeyVerification,
}

impl std::fmt::Display for IssueStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IssueStage::Proof => "proof",
            IssueStage::Pairing => "pairing-check",
            IssueStage::KeyVerification => "key-verification",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("vector dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("identity must be nonzero")]
    ZeroIdentity,
    #[error("injected randomness makes d + a vanish")]
    DegenerateRandomness,
    #[error("inner product not found within bound {0}")]
    DlogOutOfRange(u64),
    #[error("no candidate identity matches the key")]
    TraceNotFound,
    #[error("user proof of knowledge rejected")]
    InvalidUserProof,
    #[error("issuance failed at the {0} stage")]
    Issuance(IssueStage),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
