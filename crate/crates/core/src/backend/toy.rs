//! Deterministic insecure backend over small integers.
//!
//! `G` is `Z_p` under addition, so an element is literally its discrete log
//! with respect to the generator `1`. `Gt` is the order-`p` subgroup of
//! `Z_q^*` for the smallest prime `q = k*p + 1`, generated by a fixed
//! residue `gt_gen`. The pairing is `e(x, y) = gt_gen^(x*y mod p)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, RngCore};

use super::{counters, Backend, BackendId, GroupElement, ScalarField};
use crate::codec::DecodeError;

/// Default toy group order.
pub const TOY_DEFAULT_ORDER: u64 = 1_000_003;

/// The toy backend at the default order.
pub type Toy = ToyBackend<TOY_DEFAULT_ORDER>;

const fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

const fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

const fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

const fn target_modulus(p: u64) -> u64 {
    let mut k = 2;
    loop {
        let q = k * p + 1;
        if is_prime(q) {
            return q;
        }
        k += 2;
    }
}

const fn target_generator(p: u64, q: u64) -> u64 {
    let mut x = 2;
    loop {
        let g = pow_mod(x, (q - 1) / p, q);
        if g != 1 {
            return g;
        }
        x += 1;
    }
}

const fn byte_width(n: u64) -> usize {
    let bits = 64 - n.leading_zeros() as usize;
    bits.div_ceil(8)
}

fn read_be(bytes: &[u8], width: usize) -> Result<u64, DecodeError> {
    if bytes.len() != width {
        return Err(DecodeError::Length { expected: width, got: bytes.len() });
    }
    Ok(bytes.iter().fold(0u64, |acc, &b| (acc << 8) | u64::from(b)))
}

fn write_be(v: u64, width: usize, out: &mut Vec<u8>) {
    out.extend_from_slice(&v.to_be_bytes()[8 - width..]);
}

/// Toy bilinear group of prime order `P`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ToyBackend<const P: u64>;

impl<const P: u64> ToyBackend<P> {
    const PRIME_CHECK: () = assert!(is_prime(P) && P > 2, "toy order must be an odd prime");

    /// Modulus of the field hosting `Gt`.
    pub const TARGET_MODULUS: u64 = target_modulus(P);

    /// Generator of `Gt`, equal to `e(1, 1)`.
    pub const TARGET_GENERATOR: u64 = target_generator(P, Self::TARGET_MODULUS);
}

/// Integer mod `P`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyScalar<const P: u64>(u64);

impl<const P: u64> ToyScalar<P> {
    pub fn new(v: u64) -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = ToyBackend::<P>::PRIME_CHECK;
        ToyScalar(v % P)
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

impl<const P: u64> fmt::Debug for ToyScalar<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Add for ToyScalar<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ToyScalar(((self.0 as u128 + rhs.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> Sub for ToyScalar<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const P: u64> Mul for ToyScalar<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        ToyScalar(mul_mod(self.0, rhs.0, P))
    }
}

impl<const P: u64> Neg for ToyScalar<P> {
    type Output = Self;
    fn neg(self) -> Self {
        ToyScalar((P - self.0) % P)
    }
}

impl<const P: u64> ScalarField for ToyScalar<P> {
    const ENCODED_LEN: usize = byte_width(P);

    fn zero() -> Self {
        ToyScalar(0)
    }

    fn one() -> Self {
        ToyScalar(1)
    }

    fn from_u64(v: u64) -> Self {
        Self::new(v)
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        ToyScalar(rng.gen_range(0..P))
    }

    fn invert(&self) -> Option<Self> {
        (self.0 != 0).then(|| ToyScalar(pow_mod(self.0, P - 2, P)))
    }

    fn small_modulus() -> Option<u64> {
        Some(P)
    }

    fn to_u64(&self) -> Option<u64> {
        Some(self.0)
    }

    fn encode(&self, out: &mut Vec<u8>) {
        write_be(self.0, Self::ENCODED_LEN, out);
    }

    fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let v = read_be(bytes, Self::ENCODED_LEN)?;
        if v >= P {
            return Err(DecodeError::NonCanonical("toy scalar out of range"));
        }
        Ok(ToyScalar(v))
    }
}

/// Element of the toy source group, stored as its discrete log.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ToyG<const P: u64>(u64);

impl<const P: u64> ToyG<P> {
    pub fn from_exponent(e: ToyScalar<P>) -> Self {
        ToyG(e.0)
    }

    /// Discrete log with respect to the canonical generator.
    pub fn exponent(&self) -> ToyScalar<P> {
        ToyScalar(self.0)
    }
}

impl<const P: u64> fmt::Debug for ToyG<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g^{}", self.0)
    }
}

impl<const P: u64> GroupElement for ToyG<P> {
    type Scalar = ToyScalar<P>;

    const ENCODED_LEN: usize = byte_width(P);

    fn identity() -> Self {
        ToyG(0)
    }

    fn op(&self, rhs: &Self) -> Self {
        ToyG((ToyScalar::<P>(self.0) + ToyScalar(rhs.0)).0)
    }

    fn inverse(&self) -> Self {
        ToyG((-ToyScalar::<P>(self.0)).0)
    }

    fn pow(&self, k: &ToyScalar<P>) -> Self {
        counters::record_g_exp();
        ToyG(mul_mod(self.0, k.0, P))
    }

    fn encode(&self, out: &mut Vec<u8>) {
        write_be(self.0, Self::ENCODED_LEN, out);
    }

    fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        ToyScalar::<P>::decode(bytes)
            .map(|s| ToyG(s.0))
            .map_err(|_| DecodeError::NonCanonical("toy group element out of range"))
    }
}

/// Element of the toy target group: a residue mod `TARGET_MODULUS`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ToyGt<const P: u64>(u64);

impl<const P: u64> ToyGt<P> {
    pub fn value(&self) -> u64 {
        self.0
    }

    /// `TARGET_GENERATOR^k`, computed outside the operation counters.
    pub fn generator_pow(k: ToyScalar<P>) -> Self {
        ToyGt(pow_mod(ToyBackend::<P>::TARGET_GENERATOR, k.0, ToyBackend::<P>::TARGET_MODULUS))
    }
}

impl<const P: u64> fmt::Debug for ToyGt<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gt({})", self.0)
    }
}

impl<const P: u64> GroupElement for ToyGt<P> {
    type Scalar = ToyScalar<P>;

    const ENCODED_LEN: usize = byte_width(target_modulus(P));

    fn identity() -> Self {
        ToyGt(1)
    }

    fn op(&self, rhs: &Self) -> Self {
        ToyGt(mul_mod(self.0, rhs.0, ToyBackend::<P>::TARGET_MODULUS))
    }

    fn inverse(&self) -> Self {
        let q = ToyBackend::<P>::TARGET_MODULUS;
        ToyGt(pow_mod(self.0, q - 2, q))
    }

    fn pow(&self, k: &ToyScalar<P>) -> Self {
        counters::record_gt_exp();
        ToyGt(pow_mod(self.0, k.0, ToyBackend::<P>::TARGET_MODULUS))
    }

    fn encode(&self, out: &mut Vec<u8>) {
        write_be(self.0, Self::ENCODED_LEN, out);
    }

    fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let q = ToyBackend::<P>::TARGET_MODULUS;
        let v = read_be(bytes, Self::ENCODED_LEN)?;
        if v == 0 || v >= q {
            return Err(DecodeError::NonCanonical("toy target element out of range"));
        }
        if pow_mod(v, P, q) != 1 {
            return Err(DecodeError::Invalid("toy target element outside the order-p subgroup"));
        }
        Ok(ToyGt(v))
    }
}

impl<const P: u64> Backend for ToyBackend<P> {
    const ID: BackendId = BackendId::Toy;

    type Scalar = ToyScalar<P>;
    type G = ToyG<P>;
    type Gt = ToyGt<P>;

    fn generator() -> ToyG<P> {
        ToyG(1)
    }

    fn random_element<R: RngCore + ?Sized>(rng: &mut R) -> ToyG<P> {
        ToyG(rng.gen_range(1..P))
    }

    fn pair(x: &ToyG<P>, y: &ToyG<P>) -> ToyGt<P> {
        counters::record_pairing();
        ToyGt::generator_pow(ToyScalar(mul_mod(x.0, y.0, P)))
    }
}
