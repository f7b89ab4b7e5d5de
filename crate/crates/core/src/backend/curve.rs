//! BLS12-381 backend.
//!
//! BLS12-381 is a type-3 pairing, but the scheme pairs the same logical
//! elements on either side. An element of `G` is therefore carried as a pair
//! `(g1^x, g2^x)`; the pairing takes the G1 half of its left argument and the
//! G2 half of its right argument.

use blstrs::{Bls12, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt, Scalar};
use ff::Field;
use group::{prime::PrimeCurveAffine, Curve as _, Group};
use pairing::{MillerLoopResult, MultiMillerLoop};
use rand::RngCore;

use super::{counters, Backend, BackendId, GroupElement, ScalarField};
use crate::codec::DecodeError;
use blstrs::Compress;

const G1_LEN: usize = 48;
const G2_LEN: usize = 96;
const GT_COMPRESSED_LEN: usize = 288;

/// BLS12-381 with dual-half source group elements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Curve;

impl ScalarField for Scalar {
    const ENCODED_LEN: usize = 32;

    fn zero() -> Self {
        <Scalar as Field>::ZERO
    }

    fn one() -> Self {
        <Scalar as Field>::ONE
    }

    fn from_u64(v: u64) -> Self {
        Scalar::from(v)
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        <Scalar as Field>::random(rng)
    }

    fn invert(&self) -> Option<Self> {
        Option::from(Field::invert(self))
    }

    fn small_modulus() -> Option<u64> {
        None
    }

    fn to_u64(&self) -> Option<u64> {
        let be = self.to_bytes_be();
        if be[..24].iter().any(|&b| b != 0) {
            return None;
        }
        let mut tail = [0u8; 8];
        tail.copy_from_slice(&be[24..]);
        Some(u64::from_be_bytes(tail))
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_bytes_be());
    }

    fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let arr: &[u8; 32] = bytes
            .try_into()
            .map_err(|_| DecodeError::Length { expected: 32, got: bytes.len() })?;
        Option::from(Scalar::from_bytes_be(arr))
            .ok_or(DecodeError::NonCanonical("scalar not below the group order"))
    }
}

/// `(g1^x, g2^x)` for some unknown `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualElement {
    g1: G1Projective,
    g2: G2Projective,
}

impl DualElement {
    /// Builds an element from its two halves without checking that they
    /// share a discrete log. Only useful for constructing malformed input.
    pub fn from_halves_unchecked(g1: G1Projective, g2: G2Projective) -> Self {
        DualElement { g1, g2 }
    }

    pub fn g1(&self) -> G1Projective {
        self.g1
    }

    pub fn g2(&self) -> G2Projective {
        self.g2
    }

    fn halves_consistent(g1: &G1Affine, g2: &G2Affine) -> bool {
        let lhs = (g1, &G2Prepared::from(G2Affine::generator()));
        let neg = -G1Affine::generator();
        let rhs = (&neg, &G2Prepared::from(*g2));
        let out = Bls12::multi_miller_loop(&[lhs, rhs]).final_exponentiation();
        bool::from(Group::is_identity(&out))
    }
}

impl GroupElement for DualElement {
    type Scalar = Scalar;

    const ENCODED_LEN: usize = G1_LEN + G2_LEN;

    fn identity() -> Self {
        DualElement { g1: G1Projective::identity(), g2: G2Projective::identity() }
    }

    fn op(&self, rhs: &Self) -> Self {
        DualElement { g1: self.g1 + rhs.g1, g2: self.g2 + rhs.g2 }
    }

    fn inverse(&self) -> Self {
        DualElement { g1: -self.g1, g2: -self.g2 }
    }

    fn pow(&self, k: &Scalar) -> Self {
        counters::record_g_exp();
        DualElement { g1: self.g1 * k, g2: self.g2 * k }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.g1.to_affine().to_compressed());
        out.extend_from_slice(&self.g2.to_affine().to_compressed());
    }

    fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(DecodeError::Length { expected: Self::ENCODED_LEN, got: bytes.len() });
        }
        let mut a = [0u8; G1_LEN];
        a.copy_from_slice(&bytes[..G1_LEN]);
        let mut b = [0u8; G2_LEN];
        b.copy_from_slice(&bytes[G1_LEN..]);
        let g1: G1Affine = Option::from(G1Affine::from_compressed(&a))
            .ok_or(DecodeError::Invalid("bad G1 half"))?;
        let g2: G2Affine = Option::from(G2Affine::from_compressed(&b))
            .ok_or(DecodeError::Invalid("bad G2 half"))?;
        if !Self::halves_consistent(&g1, &g2) {
            return Err(DecodeError::Invalid("G1 and G2 halves have different discrete logs"));
        }
        Ok(DualElement { g1: g1.into(), g2: g2.into() })
    }
}

impl GroupElement for Gt {
    type Scalar = Scalar;

    /// One flag byte (0 = identity, 1 = torus-compressed) plus the body.
    const ENCODED_LEN: usize = 1 + GT_COMPRESSED_LEN;

    fn identity() -> Self {
        <Gt as Group>::identity()
    }

    fn op(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn inverse(&self) -> Self {
        -self
    }

    fn pow(&self, k: &Scalar) -> Self {
        counters::record_gt_exp();
        self * k
    }

    fn encode(&self, out: &mut Vec<u8>) {
        if bool::from(Group::is_identity(self)) {
            out.push(0);
            out.extend_from_slice(&[0u8; GT_COMPRESSED_LEN]);
        } else {
            out.push(1);
            self.write_compressed(&mut *out).expect("writing to a Vec cannot fail");
        }
    }

    fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(DecodeError::Length { expected: Self::ENCODED_LEN, got: bytes.len() });
        }
        let value = match bytes[0] {
            0 if bytes[1..].iter().all(|&b| b == 0) => <Gt as Group>::identity(),
            1 => Gt::read_compressed(&bytes[1..])
                .map_err(|_| DecodeError::Invalid("bad target group element"))?,
            _ => return Err(DecodeError::NonCanonical("bad target group flag")),
        };
        if GroupElement::to_bytes(&value) != bytes {
            return Err(DecodeError::NonCanonical("target group element not in canonical form"));
        }
        Ok(value)
    }
}

impl Backend for Curve {
    const ID: BackendId = BackendId::Curve;

    type Scalar = Scalar;
    type G = DualElement;
    type Gt = Gt;

    fn generator() -> DualElement {
        DualElement { g1: G1Projective::generator(), g2: G2Projective::generator() }
    }

    fn random_element<R: RngCore + ?Sized>(rng: &mut R) -> DualElement {
        let x = Scalar::random_nonzero(rng);
        DualElement { g1: G1Projective::generator() * x, g2: G2Projective::generator() * x }
    }

    fn pair(x: &DualElement, y: &DualElement) -> Gt {
        counters::record_pairing();
        blstrs::pairing(&x.g1.to_affine(), &y.g2.to_affine())
    }
}
