//! Bilinear group abstraction.
//!
//! The scheme is written over a single source group `G` with a symmetric
//! pairing `e: G x G -> Gt`. Two instantiations exist:
//!
//! * [`Toy`]: `G` is the additive group of integers mod a small prime, so an
//!   element *is* its discrete log. Insecure, but every exponent can be
//!   inspected, which makes brute-force oracles possible in tests.
//! * [`Curve`]: BLS12-381, where each element of `G` is a pair of points in
//!   G1 and G2 with the same discrete log. Either half can be fed to the
//!   pairing, so every equation keeps its symmetric shape.

mod curve;
mod toy;

pub mod counters;

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::codec::DecodeError;

pub use curve::{Curve, DualElement};
pub use toy::{Toy, ToyBackend, ToyG, ToyGt, ToyScalar, TOY_DEFAULT_ORDER};

/// One-byte backend tag carried by every persisted file and wire frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum BackendId {
    Toy = 0x01,
    Curve = 0x02,
}

impl BackendId {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(BackendId::Toy),
            0x02 => Some(BackendId::Curve),
            _ => None,
        }
    }

    pub fn as_byte(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            BackendId::Toy => "toy",
            BackendId::Curve => "curve",
        }
    }
}

impl std::str::FromStr for BackendId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "toy" => Ok(BackendId::Toy),
            "curve" => Ok(BackendId::Curve),
            other => Err(format!("unknown backend `{other}` (expected `toy` or `curve`)")),
        }
    }
}

impl std::fmt::Display for BackendId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Integers modulo the prime group order.
pub trait ScalarField:
    Copy
    + Eq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Width of the big-endian canonical encoding.
    const ENCODED_LEN: usize;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self;
    fn invert(&self) -> Option<Self>;

    /// The group order when it fits in a `u64` (toy backend only).
    fn small_modulus() -> Option<u64>;

    /// The value as an integer, when it is below 2^64.
    fn to_u64(&self) -> Option<u64>;

    fn encode(&self, out: &mut Vec<u8>);
    fn decode(bytes: &[u8]) -> Result<Self, DecodeError>;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn from_i64(v: i64) -> Self {
        if v < 0 {
            -Self::from_u64(v.unsigned_abs())
        } else {
            Self::from_u64(v as u64)
        }
    }

    /// Uniform nonzero scalar.
    fn random_nonzero<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let s = Self::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::ENCODED_LEN);
        self.encode(&mut out);
        out
    }
}

/// A prime-order group written multiplicatively.
pub trait GroupElement: Clone + Eq + Debug + Send + Sync + 'static {
    type Scalar: ScalarField;

    const ENCODED_LEN: usize;

    fn identity() -> Self;

    /// The group operation.
    fn op(&self, rhs: &Self) -> Self;

    fn inverse(&self) -> Self;

    /// Exponentiation. Recorded by [`counters`].
    fn pow(&self, k: &Self::Scalar) -> Self;

    fn encode(&self, out: &mut Vec<u8>);
    fn decode(bytes: &[u8]) -> Result<Self, DecodeError>;

    fn div(&self, rhs: &Self) -> Self {
        self.op(&rhs.inverse())
    }

    fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::ENCODED_LEN);
        self.encode(&mut out);
        out
    }
}

/// A bilinear group instantiation.
pub trait Backend: Copy + Debug + Default + Eq + Send + Sync + 'static {
    const ID: BackendId;

    type Scalar: ScalarField;
    type G: GroupElement<Scalar = Self::Scalar>;
    type Gt: GroupElement<Scalar = Self::Scalar>;

    /// Fixed canonical generator of `G`.
    fn generator() -> Self::G;

    /// Uniform non-identity element of `G`. Not counted as an exponentiation.
    fn random_element<R: RngCore + ?Sized>(rng: &mut R) -> Self::G;

    /// The bilinear map. Recorded by [`counters`].
    fn pair(x: &Self::G, y: &Self::G) -> Self::Gt;
}

/// `SHA-256(domain_tag || 0x00 || transcript)` read as a big-endian integer
/// and reduced mod the group order.
pub fn hash_to_scalar<S: ScalarField>(domain_tag: &[u8], transcript: &[u8]) -> S {
    counters::record_hash();
    let mut hasher = Sha256::new();
    hasher.update(domain_tag);
    hasher.update([0u8]);
    hasher.update(transcript);
    let digest = hasher.finalize();
    scalar_from_be_bytes(&digest)
}

/// Reduces an arbitrary-length big-endian integer mod the group order.
pub fn scalar_from_be_bytes<S: ScalarField>(bytes: &[u8]) -> S {
    let radix = S::from_u64(256);
    bytes
        .iter()
        .fold(S::zero(), |acc, &b| acc * radix + S::from_u64(u64::from(b)))
}

/// Inner product of two scalar vectors of equal length.
pub fn inner_product<S: ScalarField>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + *x * *y)
}
