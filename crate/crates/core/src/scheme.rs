//! Traceable inner-product functional encryption.
//!
//! A ciphertext of `x` under the public parameters can be opened by a key
//! for `y` to `<x, y>` and nothing else. Every key embeds its holder's
//! identity `theta` alongside a per-key randomizer pair `(w, d)` that binds
//! all five components together, and the tracer's secret `b` recovers
//! `e(K3, g2)^theta` from any well-formed key.

use rand::RngCore;

use crate::backend::{inner_product, Backend, GroupElement, ScalarField};
use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::dlog::DlogTable;
use crate::error::{Error, Result};

/// Default search bound for the final discrete log of decryption.
pub const DEFAULT_DLOG_BOUND: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams<E: Backend> {
    pub g0: E::G,
    pub g1: E::G,
    pub g2: E::G,
    /// Extra generator blinding the user's commitment during issuance.
    pub h: E::G,
    /// Tracer public key `B = g2^b`.
    pub tracer_pk: E::G,
    /// KGC public value `Y = g0^a`.
    pub kgc_pk: E::G,
    /// Masking bases `h_i = g1^{s_i}`, one per vector coordinate.
    pub masks: Vec<E::G>,
    /// `e(g0, g1)`, the base of the decryption discrete log.
    dlog_base: E::Gt,
}

impl<E: Backend> PublicParams<E> {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        g0: E::G,
        g1: E::G,
        g2: E::G,
        h: E::G,
        tracer_pk: E::G,
        kgc_pk: E::G,
        masks: Vec<E::G>,
    ) -> Self {
        let dlog_base = E::pair(&g0, &g1);
        PublicParams { g0, g1, g2, h, tracer_pk, kgc_pk, masks, dlog_base }
    }

    pub fn dimension(&self) -> usize {
        self.masks.len()
    }

    pub fn dlog_base(&self) -> &E::Gt {
        &self.dlog_base
    }

    /// `g2 * B`, the base that carries `w` in `K2`.
    pub fn g2_tracer(&self) -> E::G {
        self.g2.op(&self.tracer_pk)
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got == self.dimension() {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.dimension(), got })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterSecretKey<E: Backend> {
    pub a: E::Scalar,
    pub s: Vec<E::Scalar>,
}

impl<E: Backend> MasterSecretKey<E> {
    pub fn dimension(&self) -> usize {
        self.s.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracerSecret<E: Backend> {
    pub b: E::Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext<E: Backend> {
    /// `h_i^r * g1^{x_i}`
    pub masked: Vec<E::G>,
    pub g1_r: E::G,
    pub g2_r: E::G,
    pub g0_r: E::G,
}

impl<E: Backend> Ciphertext<E> {
    pub fn dimension(&self) -> usize {
        self.masked.len()
    }

    /// Number of group elements, always `l + 3`.
    pub fn element_count(&self) -> usize {
        self.masked.len() + 3
    }
}

/// `(K1, K2, K3, K4 = w, K5 = d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalKey<E: Backend> {
    pub k1: E::G,
    pub k2: E::G,
    pub k3: E::G,
    pub k4: E::Scalar,
    pub k5: E::Scalar,
}

/// What the key holder must present alongside the key: the function
/// vector `y` and the embedded identity `theta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyContext<E: Backend> {
    pub y: Vec<E::Scalar>,
    pub theta: E::Scalar,
}

impl<E: Backend> KeyContext<E> {
    pub fn new(y: Vec<E::Scalar>, theta: E::Scalar) -> Result<Self> {
        if theta.is_zero() {
            return Err(Error::ZeroIdentity);
        }
        Ok(KeyContext { y, theta })
    }

    pub fn dimension(&self) -> usize {
        self.y.len()
    }
}

fn random_non_identity<E: Backend, R: RngCore + ?Sized>(rng: &mut R) -> E::G {
    loop {
        let g = E::random_element(rng);
        if !g.is_identity() {
            return g;
        }
    }
}

/// Samples fresh public parameters, the KGC master secret and the tracer
/// secret for vectors of length `l`.
pub fn setup<E: Backend, R: RngCore + ?Sized>(
    l: usize,
    rng: &mut R,
) -> Result<(PublicParams<E>, MasterSecretKey<E>, TracerSecret<E>)> {
    if l == 0 {
        return Err(Error::ZeroDimension);
    }
    let g0 = random_non_identity::<E, _>(rng);
    let g1 = random_non_identity::<E, _>(rng);
    let g2 = random_non_identity::<E, _>(rng);
    let h = random_non_identity::<E, _>(rng);

    let s: Vec<E::Scalar> = (0..l).map(|_| E::Scalar::random(rng)).collect();
    let masks = s.iter().map(|si| g1.pow(si)).collect();

    // b = -1 would collapse g2 * B to the identity
    let b = loop {
        let b = E::Scalar::random_nonzero(rng);
        if !(b + E::Scalar::one()).is_zero() {
            break b;
        }
    };
    let tracer_pk = g2.pow(&b);

    let a = E::Scalar::random_nonzero(rng);
    let kgc_pk = g0.pow(&a);

    let pp = PublicParams::from_parts(g0, g1, g2, h, tracer_pk, kgc_pk, masks);
    Ok((pp, MasterSecretKey { a, s }, TracerSecret { b }))
}

/// Encrypts `x` with fresh randomness.
pub fn encrypt<E: Backend, R: RngCore + ?Sized>(
    pp: &PublicParams<E>,
    x: &[E::Scalar],
    rng: &mut R,
) -> Result<Ciphertext<E>> {
    let r = E::Scalar::random(rng);
    encrypt_with_randomness(pp, x, &r)
}

/// Encrypts `x` with caller-chosen randomness `r`.
pub fn encrypt_with_randomness<E: Backend>(
    pp: &PublicParams<E>,
    x: &[E::Scalar],
    r: &E::Scalar,
) -> Result<Ciphertext<E>> {
    pp.check_dim(x.len())?;
    let masked = pp
        .masks
        .iter()
        .zip(x)
        .map(|(hi, xi)| hi.pow(r).op(&pp.g1.pow(xi)))
        .collect();
    Ok(Ciphertext {
        masked,
        g1_r: pp.g1.pow(r),
        g2_r: pp.g2.pow(r),
        g0_r: pp.g0.pow(r),
    })
}

/// Issues a key for `ctx` directly from the master secret.
pub fn keygen<E: Backend, R: RngCore + ?Sized>(
    pp: &PublicParams<E>,
    msk: &MasterSecretKey<E>,
    ctx: &KeyContext<E>,
    rng: &mut R,
) -> Result<FunctionalKey<E>> {
    let w = E::Scalar::random(rng);
    loop {
        let d = E::Scalar::random(rng);
        match keygen_with(pp, msk, ctx, &w, &d) {
            Err(Error::DegenerateRandomness) => continue,
            other => return other,
        }
    }
}

/// Deterministic key generation with injected `(w, d)`.
pub fn keygen_with<E: Backend>(
    pp: &PublicParams<E>,
    msk: &MasterSecretKey<E>,
    ctx: &KeyContext<E>,
    w: &E::Scalar,
    d: &E::Scalar,
) -> Result<FunctionalKey<E>> {
    pp.check_dim(ctx.y.len())?;
    pp.check_dim(msk.s.len())?;
    if ctx.theta.is_zero() {
        return Err(Error::ZeroIdentity);
    }
    let inv = (*d + msk.a).invert().ok_or(Error::DegenerateRandomness)?;

    let k1 = pp
        .g0
        .pow(&inner_product(&ctx.y, &msk.s))
        .op(&pp.tracer_pk.pow(&(*w * inv)));
    let k2 = pp
        .g0
        .op(&pp.g2_tracer().pow(w))
        .op(&pp.g2.pow(&ctx.theta))
        .pow(&inv);
    let k3 = pp.g1.pow(&inv);
    Ok(FunctionalKey { k1, k2, k3, k4: *w, k5: *d })
}

/// Outcome of each key-verification equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyCheck {
    /// `e(K1, g1) = e(g0, prod h_i^{y_i}) * e(B^{K4}, K3)`
    pub vector_binding: bool,
    /// `e(K3, g0^{K5} * Y) = e(g0, g1)`
    pub randomizer: bool,
    /// `e(K2, g0^{K5} * Y) = e(g0, g0) * e(g0, g2 B)^{K4} * e(g0, g2)^theta`
    pub identity_binding: bool,
}

impl KeyCheck {
    pub fn all(&self) -> bool {
        self.vector_binding && self.randomizer && self.identity_binding
    }
}

/// Evaluates all three verification equations. Always performs 9 pairings.
pub fn check_key<E: Backend>(
    pp: &PublicParams<E>,
    key: &FunctionalKey<E>,
    ctx: &KeyContext<E>,
) -> Option<KeyCheck> {
    if ctx.y.len() != pp.dimension() {
        return None;
    }

    let masked_y = pp
        .masks
        .iter()
        .zip(&ctx.y)
        .fold(E::G::identity(), |acc, (hi, yi)| acc.op(&hi.pow(yi)));
    let vector_binding = E::pair(&key.k1, &pp.g1)
        == E::pair(&pp.g0, &masked_y).op(&E::pair(&pp.tracer_pk.pow(&key.k4), &key.k3));

    let shifted = pp.g0.pow(&key.k5).op(&pp.kgc_pk);
    let randomizer = E::pair(&key.k3, &shifted) == E::pair(&pp.g0, &pp.g1);

    let shifted = pp.g0.pow(&key.k5).op(&pp.kgc_pk);
    let identity_binding = E::pair(&key.k2, &shifted)
        == E::pair(&pp.g0, &pp.g0)
            .op(&E::pair(&pp.g0, &pp.g2_tracer()).pow(&key.k4))
            .op(&E::pair(&pp.g0, &pp.g2).pow(&ctx.theta));

    Some(KeyCheck { vector_binding, randomizer, identity_binding })
}

/// True iff the key is well formed for `ctx`.
pub fn verify_key<E: Backend>(
    pp: &PublicParams<E>,
    key: &FunctionalKey<E>,
    ctx: &KeyContext<E>,
) -> bool {
    check_key(pp, key, ctx).is_some_and(|c| c.all())
}

/// `e(g0, g1)^{<x, y>}` recovered from a ciphertext with five pairings.
pub fn decrypt_to_target<E: Backend>(
    pp: &PublicParams<E>,
    key: &FunctionalKey<E>,
    ctx: &KeyContext<E>,
    ct: &Ciphertext<E>,
) -> Result<E::Gt> {
    pp.check_dim(ctx.y.len())?;
    pp.check_dim(ct.masked.len())?;

    let weighted = ct
        .masked
        .iter()
        .zip(&ctx.y)
        .fold(E::G::identity(), |acc, (ci, yi)| acc.op(&ci.pow(yi)));
    let numerator = E::pair(&pp.g0, &weighted).op(&E::pair(&ct.g1_r, &key.k2));

    let blinded = key.k3.pow(&key.k4).op(&key.k3.pow(&ctx.theta));
    let denominator = E::pair(&key.k1, &ct.g1_r)
        .op(&E::pair(&key.k3, &ct.g0_r))
        .op(&E::pair(&blinded, &ct.g2_r));

    Ok(numerator.div(&denominator))
}

/// Decryption with a reusable baby-step table, for callers that open many
/// ciphertexts under the same parameters.
#[derive(Debug, Clone)]
pub struct Decryptor<E: Backend> {
    table: DlogTable<E::Gt>,
}

impl<E: Backend> Decryptor<E> {
    pub fn new(pp: &PublicParams<E>, bound: u64) -> Self {
        Decryptor { table: DlogTable::new(pp.dlog_base(), bound) }
    }

    pub fn decrypt(
        &self,
        pp: &PublicParams<E>,
        key: &FunctionalKey<E>,
        ctx: &KeyContext<E>,
        ct: &Ciphertext<E>,
    ) -> Result<i64> {
        let target = decrypt_to_target(pp, key, ctx, ct)?;
        self.table
            .solve_signed(&target)
            .ok_or(Error::DlogOutOfRange(self.table.bound()))
    }
}

/// Recovers `<x, y>`, provided `|<x, y>| <= bound`.
pub fn decrypt<E: Backend>(
    pp: &PublicParams<E>,
    key: &FunctionalKey<E>,
    ctx: &KeyContext<E>,
    ct: &Ciphertext<E>,
    bound: u64,
) -> Result<i64> {
    Decryptor::new(pp, bound).decrypt(pp, key, ctx, ct)
}

/// The tracer's view of a key: `target = base^theta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceTarget<E: Backend> {
    /// `e(K3, g2)`
    pub base: E::Gt,
    /// `e(K2, g1) / (e(g0, K3) * e(g2, K3^{K4} * K3^{K4 b}))`
    pub target: E::Gt,
}

impl<E: Backend> TraceTarget<E> {
    pub fn matches(&self, theta: &E::Scalar) -> bool {
        self.base.pow(theta) == self.target
    }
}

/// Strips everything but the identity term from `K2`. Four pairings and
/// two exponentiations.
pub fn trace_target<E: Backend>(
    pp: &PublicParams<E>,
    tsk: &TracerSecret<E>,
    key: &FunctionalKey<E>,
) -> TraceTarget<E> {
    let k3_w = key.k3.pow(&key.k4);
    let k3_wb = key.k3.pow(&(key.k4 * tsk.b));
    let target = E::pair(&key.k2, &pp.g1).div(
        &E::pair(&pp.g0, &key.k3).op(&E::pair(&pp.g2, &k3_w.op(&k3_wb))),
    );
    TraceTarget { base: E::pair(&key.k3, &pp.g2), target }
}

/// Returns the first candidate identity embedded in `key`. Each candidate
/// tried costs one target-group exponentiation.
pub fn trace<E: Backend>(
    pp: &PublicParams<E>,
    tsk: &TracerSecret<E>,
    key: &FunctionalKey<E>,
    candidates: &[E::Scalar],
) -> Result<E::Scalar> {
    let tt = trace_target(pp, tsk, key);
    candidates
        .iter()
        .find(|theta| tt.matches(theta))
        .copied()
        .ok_or(Error::TraceNotFound)
}

impl<E: Backend> Encode for PublicParams<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.element(&self.g0)
            .element(&self.g1)
            .element(&self.g2)
            .element(&self.h)
            .element(&self.tracer_pk)
            .element(&self.kgc_pk)
            .elements(&self.masks);
    }
}

impl<E: Backend> Decode for PublicParams<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let g0: E::G = r.element()?;
        let g1: E::G = r.element()?;
        let g2: E::G = r.element()?;
        let h: E::G = r.element()?;
        let tracer_pk: E::G = r.element()?;
        let kgc_pk: E::G = r.element()?;
        if [&g0, &g1, &g2, &h, &tracer_pk, &kgc_pk].iter().any(|g| g.is_identity()) {
            return Err(DecodeError::Invalid("identity among the public generators"));
        }
        let masks = r.elements()?;
        if masks.is_empty() {
            return Err(DecodeError::Invalid("zero-dimensional parameters"));
        }
        Ok(PublicParams::from_parts(g0, g1, g2, h, tracer_pk, kgc_pk, masks))
    }
}

impl<E: Backend> Encode for MasterSecretKey<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.scalar(&self.a).scalars(&self.s);
    }
}

impl<E: Backend> Decode for MasterSecretKey<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(MasterSecretKey { a: r.scalar()?, s: r.scalars()? })
    }
}

impl<E: Backend> Encode for TracerSecret<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.scalar(&self.b);
    }
}

impl<E: Backend> Decode for TracerSecret<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(TracerSecret { b: r.scalar()? })
    }
}

impl<E: Backend> Encode for Ciphertext<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.elements(&self.masked)
            .element(&self.g1_r)
            .element(&self.g2_r)
            .element(&self.g0_r);
    }
}

impl<E: Backend> Decode for Ciphertext<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Ciphertext {
            masked: r.elements()?,
            g1_r: r.element()?,
            g2_r: r.element()?,
            g0_r: r.element()?,
        })
    }
}

impl<E: Backend> Encode for FunctionalKey<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.element(&self.k1)
            .element(&self.k2)
            .element(&self.k3)
            .scalar(&self.k4)
            .scalar(&self.k5);
    }
}

impl<E: Backend> Decode for FunctionalKey<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(FunctionalKey {
            k1: r.element()?,
            k2: r.element()?,
            k3: r.element()?,
            k4: r.scalar()?,
            k5: r.scalar()?,
        })
    }
}

impl<E: Backend> Encode for KeyContext<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.scalars(&self.y).scalar(&self.theta);
    }
}

impl<E: Backend> Decode for KeyContext<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let y = r.scalars()?;
        let theta: E::Scalar = r.scalar()?;
        if theta.is_zero() {
            return Err(DecodeError::Invalid("zero identity"));
        }
        Ok(KeyContext { y, theta })
    }
}
