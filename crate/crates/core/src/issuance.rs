//! Two-round blind key issuance.
//!
//! The user commits to its identity in `(A1, A2)` and proves knowledge of
//! the opening; the KGC answers with a blinded key share and proves it used
//! its master secret; the user unblinds, checks everything and ends up with
//! exactly the key [`keygen`](crate::scheme::keygen) would have produced for
//! `w = w1 + w2`, while the KGC never learns `theta`.

use std::fmt;

use rand::RngCore;

use crate::backend::{inner_product, Backend, GroupElement, ScalarField};
use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::error::{Error, IssueStage, Result};
use crate::scheme::{verify_key, FunctionalKey, KeyContext, MasterSecretKey, PublicParams};
use crate::sigma::{
    sigma_k_prove, sigma_k_prove_with_nonces, sigma_k_verify, sigma_u_prove_with_nonces,
    sigma_u_verify, KgcNonces, KgcStatement, KgcWitness, SigmaKProof, SigmaUProof, UserNonces,
    UserStatement, UserWitness,
};

/// What the user keeps between the two rounds. Never leaves the process.
#[derive(Clone, PartialEq, Eq)]
pub struct UserRound1State<E: Backend> {
    pub theta: E::Scalar,
    pub tau: E::Scalar,
    pub w1: E::Scalar,
    pub y: Vec<E::Scalar>,
    a1: E::G,
    a2: E::G,
}

impl<E: Backend> fmt::Debug for UserRound1State<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserRound1State")
            .field("l", &self.y.len())
            .finish_non_exhaustive()
    }
}

/// First message, user to KGC.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Msg1<E: Backend> {
    pub y: Vec<E::Scalar>,
    pub a1: E::G,
    pub a2: E::G,
    pub proof_u: SigmaUProof<E>,
}

/// Second message, KGC to user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Msg2<E: Backend> {
    pub w2: E::Scalar,
    pub b1: E::G,
    pub b2: E::G,
    pub b3: E::G,
    pub b4: E::G,
    pub b5: E::Scalar,
    pub proof_k: SigmaKProof<E>,
}

/// Injected user-side randomness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserRandomness<E: Backend> {
    pub tau: E::Scalar,
    pub w1: E::Scalar,
    pub nonces: UserNonces<E>,
}

impl<E: Backend> UserRandomness<E> {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        UserRandomness {
            tau: E::Scalar::random(rng),
            w1: E::Scalar::random(rng),
            nonces: UserNonces {
                tau: E::Scalar::random(rng),
                theta: E::Scalar::random(rng),
                w1: E::Scalar::random(rng),
            },
        }
    }
}

/// Injected KGC-side randomness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KgcRandomness<E: Backend> {
    pub w2: E::Scalar,
    pub d: E::Scalar,
    pub nonces: KgcNonces<E>,
}

pub fn user_round1<E: Backend, R: RngCore + ?Sized>(
    pp: &PublicParams<E>,
    theta: E::Scalar,
    y: Vec<E::Scalar>,
    rng: &mut R,
) -> Result<(UserRound1State<E>, Msg1<E>)> {
    user_round1_with(pp, theta, y, &UserRandomness::random(rng))
}

pub fn user_round1_with<E: Backend>(
    pp: &PublicParams<E>,
    theta: E::Scalar,
    y: Vec<E::Scalar>,
    rnd: &UserRandomness<E>,
) -> Result<(UserRound1State<E>, Msg1<E>)> {
    if theta.is_zero() {
        return Err(Error::ZeroIdentity);
    }
    pp.check_dim(y.len())?;
    let wit = UserWitness::<E> { tau: rnd.tau, theta, w1: rnd.w1 };
    let stmt = wit.statement(pp);
    let proof_u = sigma_u_prove_with_nonces(pp, &stmt, &wit, &rnd.nonces);
    let state = UserRound1State {
        theta,
        tau: rnd.tau,
        w1: rnd.w1,
        y: y.clone(),
        a1: stmt.a1.clone(),
        a2: stmt.a2.clone(),
    };
    Ok((state, Msg1 { y, a1: stmt.a1, a2: stmt.a2, proof_u }))
}

fn check_msg1<E: Backend>(pp: &PublicParams<E>, msg1: &Msg1<E>) -> Result<()> {
    pp.check_dim(msg1.y.len())?;
    let stmt = UserStatement { a1: msg1.a1.clone(), a2: msg1.a2.clone() };
    if !sigma_u_verify(pp, &stmt, &msg1.proof_u) {
        return Err(Error::InvalidUserProof);
    }
    Ok(())
}

/// KGC side: verifies the user's proof and answers with a fresh `(w2, d)`.
pub fn kgc_respond<E: Backend, R: RngCore + ?Sized>(
    pp: &PublicParams<E>,
    msk: &MasterSecretKey<E>,
    msg1: &Msg1<E>,
    rng: &mut R,
) -> Result<Msg2<E>> {
    check_msg1(pp, msg1)?;
    let w2 = E::Scalar::random(rng);
    let (d, inv) = loop {
        let d = E::Scalar::random(rng);
        if let Some(inv) = (d + msk.a).invert() {
            break (d, inv);
        }
    };
    let stmt = kgc_statement(pp, msk, msg1, w2, d, inv);
    let proof_k = sigma_k_prove(pp, &stmt, &KgcWitness { a: msk.a, s: msk.s.clone() }, rng);
    Ok(into_msg2(stmt, proof_k))
}

/// [`kgc_respond`] with injected randomness.
pub fn kgc_respond_with<E: Backend>(
    pp: &PublicParams<E>,
    msk: &MasterSecretKey<E>,
    msg1: &Msg1<E>,
    rnd: &KgcRandomness<E>,
) -> Result<Msg2<E>> {
    check_msg1(pp, msg1)?;
    let inv = (rnd.d + msk.a).invert().ok_or(Error::DegenerateRandomness)?;
    let stmt = kgc_statement(pp, msk, msg1, rnd.w2, rnd.d, inv);
    let wit = KgcWitness { a: msk.a, s: msk.s.clone() };
    let proof_k = sigma_k_prove_with_nonces(pp, &stmt, &wit, &rnd.nonces);
    Ok(into_msg2(stmt, proof_k))
}

fn kgc_statement<E: Backend>(
    pp: &PublicParams<E>,
    msk: &MasterSecretKey<E>,
    msg1: &Msg1<E>,
    w2: E::Scalar,
    d: E::Scalar,
    inv: E::Scalar,
) -> KgcStatement<E> {
    let b1 = pp
        .g0
        .pow(&inner_product(&msg1.y, &msk.s))
        .op(&msg1.a1.op(&pp.tracer_pk.pow(&w2)).pow(&inv));
    let b2 = pp.g0.op(&msg1.a2).op(&pp.g2_tracer().pow(&w2)).pow(&inv);
    let b3 = pp.g1.pow(&inv);
    let b4 = pp.h.pow(&inv);
    KgcStatement {
        y: msg1.y.clone(),
        a1: msg1.a1.clone(),
        a2: msg1.a2.clone(),
        w2,
        b1,
        b2,
        b3,
        b4,
        b5: d,
    }
}

fn into_msg2<E: Backend>(stmt: KgcStatement<E>, proof_k: SigmaKProof<E>) -> Msg2<E> {
    Msg2 {
        w2: stmt.w2,
        b1: stmt.b1,
        b2: stmt.b2,
        b3: stmt.b3,
        b4: stmt.b4,
        b5: stmt.b5,
        proof_k,
    }
}

/// User side: checks the KGC's answer in a fixed order (proof, pairings,
/// final key) and unblinds the key.
pub fn user_finalize<E: Backend>(
    pp: &PublicParams<E>,
    state: &UserRound1State<E>,
    msg2: &Msg2<E>,
) -> Result<FunctionalKey<E>> {
    let stmt = KgcStatement {
        y: state.y.clone(),
        a1: state.a1.clone(),
        a2: state.a2.clone(),
        w2: msg2.w2,
        b1: msg2.b1.clone(),
        b2: msg2.b2.clone(),
        b3: msg2.b3.clone(),
        b4: msg2.b4.clone(),
        b5: msg2.b5,
    };
    if !sigma_k_verify(pp, &stmt, &msg2.proof_k) {
        return Err(Error::Issuance(IssueStage::Proof));
    }

    let shifted = pp.g0.pow(&msg2.b5).op(&pp.kgc_pk);
    let pairings_ok = E::pair(&msg2.b3, &shifted) == E::pair(&pp.g1, &pp.g0)
        && E::pair(&msg2.b4, &shifted) == E::pair(&pp.h, &pp.g0);
    if !pairings_ok {
        return Err(Error::Issuance(IssueStage::Pairing));
    }

    let key = FunctionalKey {
        k1: msg2.b1.div(&msg2.b4.pow(&state.tau)),
        k2: msg2.b2.clone(),
        k3: msg2.b3.clone(),
        k4: state.w1 + msg2.w2,
        k5: msg2.b5,
    };
    let ctx = KeyContext { y: state.y.clone(), theta: state.theta };
    if !verify_key(pp, &key, &ctx) {
        return Err(Error::Issuance(IssueStage::KeyVerification));
    }
    Ok(key)
}

impl<E: Backend> Encode for Msg1<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.scalars(&self.y).element(&self.a1).element(&self.a2);
        self.proof_u.encode_to(w);
    }
}

impl<E: Backend> Decode for Msg1<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Msg1 {
            y: r.scalars()?,
            a1: r.element()?,
            a2: r.element()?,
            proof_u: SigmaUProof::decode_from(r)?,
        })
    }
}

impl<E: Backend> Encode for Msg2<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.scalar(&self.w2)
            .element(&self.b1)
            .element(&self.b2)
            .element(&self.b3)
            .element(&self.b4)
            .scalar(&self.b5);
        self.proof_k.encode_to(w);
    }
}

impl<E: Backend> Decode for Msg2<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Msg2 {
            w2: r.scalar()?,
            b1: r.element()?,
            b2: r.element()?,
            b3: r.element()?,
            b4: r.element()?,
            b5: r.scalar()?,
            proof_k: SigmaKProof::decode_from(r)?,
        })
    }
}
