//! Fiat–Shamir proofs of knowledge used during blind issuance.
//!
//! * `SigmaU`: the user knows `(tau, theta, w1)` with
//!   `A1 = h^tau * B^w1` and `A2 = (g2 B)^w1 * g2^theta`.
//! * `SigmaK`: the KGC knows `(a, s)` behind its response `B1..B4`, relative
//!   to the published `Y = g0^a` only through the pairing checks done later.
//!
//! Responses are `t = nonce - c * secret`. Each proof carries its
//! commitments and its challenge; verification recomputes the challenge
//! from the transcript and then checks every relation.

use rand::RngCore;

use crate::backend::{hash_to_scalar, Backend, GroupElement, ScalarField};
use crate::codec::{expect_len, Decode, DecodeError, Encode, Reader, Writer};
use crate::scheme::PublicParams;

pub const SIGMA_U_TAG: &[u8] = b"SIGMA_U";
pub const SIGMA_K_TAG: &[u8] = b"SIGMA_K";
const SIGMA_U_NONCE_TAG: &[u8] = b"SIGMA_U_NONCE";
const SIGMA_K_NONCE_TAG: &[u8] = b"SIGMA_K_NONCE";

/// The user's commitment pair `(A1, A2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserStatement<E: Backend> {
    pub a1: E::G,
    pub a2: E::G,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserWitness<E: Backend> {
    pub tau: E::Scalar,
    pub theta: E::Scalar,
    pub w1: E::Scalar,
}

impl<E: Backend> UserWitness<E> {
    /// Computes `(A1, A2)` from the witness.
    pub fn statement(&self, pp: &PublicParams<E>) -> UserStatement<E> {
        UserStatement {
            a1: pp.h.pow(&self.tau).op(&pp.tracer_pk.pow(&self.w1)),
            a2: pp.g2_tracer().pow(&self.w1).op(&pp.g2.pow(&self.theta)),
        }
    }
}

/// Nonces for one `SigmaU` proof, in witness order.
pub type UserNonces<E> = UserWitness<E>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaUProof<E: Backend> {
    pub a1_commit: E::G,
    pub a2_commit: E::G,
    pub c: E::Scalar,
    pub t_tau: E::Scalar,
    pub t_theta: E::Scalar,
    pub t_w1: E::Scalar,
}

/// First prover move: the primed commitments for the given nonces.
pub fn sigma_u_commit<E: Backend>(pp: &PublicParams<E>, nonces: &UserNonces<E>) -> UserStatement<E> {
    nonces.statement(pp)
}

pub fn sigma_u_challenge<E: Backend>(
    stmt: &UserStatement<E>,
    commit: &UserStatement<E>,
) -> E::Scalar {
    let mut t = Writer::new();
    t.element(&stmt.a1)
        .element(&commit.a1)
        .element(&stmt.a2)
        .element(&commit.a2);
    hash_to_scalar(SIGMA_U_TAG, &t.finish())
}

/// Builds the proof for an arbitrary challenge `c`. With `c` taken from
/// [`sigma_u_challenge`] this is the non-interactive proof.
pub fn sigma_u_respond<E: Backend>(
    pp: &PublicParams<E>,
    wit: &UserWitness<E>,
    nonces: &UserNonces<E>,
    c: E::Scalar,
) -> SigmaUProof<E> {
    let commit = sigma_u_commit(pp, nonces);
    SigmaUProof {
        a1_commit: commit.a1,
        a2_commit: commit.a2,
        c,
        t_tau: nonces.tau - c * wit.tau,
        t_theta: nonces.theta - c * wit.theta,
        t_w1: nonces.w1 - c * wit.w1,
    }
}

pub fn sigma_u_prove_with_nonces<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &UserStatement<E>,
    wit: &UserWitness<E>,
    nonces: &UserNonces<E>,
) -> SigmaUProof<E> {
    let c = sigma_u_challenge(stmt, &sigma_u_commit(pp, nonces));
    sigma_u_respond(pp, wit, nonces, c)
}

pub fn sigma_u_prove<E: Backend, R: RngCore + ?Sized>(
    pp: &PublicParams<E>,
    stmt: &UserStatement<E>,
    wit: &UserWitness<E>,
    rng: &mut R,
) -> SigmaUProof<E> {
    let nonces = UserNonces::<E> {
        tau: E::Scalar::random(rng),
        theta: E::Scalar::random(rng),
        w1: E::Scalar::random(rng),
    };
    sigma_u_prove_with_nonces(pp, stmt, wit, &nonces)
}

/// Reproducible proof with nonces derived from the witness and statement.
pub fn sigma_u_prove_deterministic<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &UserStatement<E>,
    wit: &UserWitness<E>,
) -> SigmaUProof<E> {
    let mut seed = Writer::new();
    seed.scalar(&wit.tau)
        .scalar(&wit.theta)
        .scalar(&wit.w1)
        .element(&stmt.a1)
        .element(&stmt.a2);
    let seed = seed.finish();
    let derive = |i: u32| {
        let mut input = seed.clone();
        input.extend_from_slice(&i.to_be_bytes());
        hash_to_scalar::<E::Scalar>(SIGMA_U_NONCE_TAG, &input)
    };
    let nonces = UserNonces::<E> { tau: derive(0), theta: derive(1), w1: derive(2) };
    sigma_u_prove_with_nonces(pp, stmt, wit, &nonces)
}

/// Checks both group relations against the challenge stored in the proof,
/// without recomputing it.
pub fn sigma_u_relations_hold<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &UserStatement<E>,
    proof: &SigmaUProof<E>,
) -> bool {
    let c = &proof.c;
    let a1 = pp
        .h
        .pow(&proof.t_tau)
        .op(&pp.tracer_pk.pow(&proof.t_w1))
        .op(&stmt.a1.pow(c));
    let a2 = pp
        .g2_tracer()
        .pow(&proof.t_w1)
        .op(&pp.g2.pow(&proof.t_theta))
        .op(&stmt.a2.pow(c));
    a1 == proof.a1_commit && a2 == proof.a2_commit
}

pub fn sigma_u_verify<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &UserStatement<E>,
    proof: &SigmaUProof<E>,
) -> bool {
    let commit = UserStatement { a1: proof.a1_commit.clone(), a2: proof.a2_commit.clone() };
    sigma_u_challenge(stmt, &commit) == proof.c && sigma_u_relations_hold(pp, stmt, proof)
}

/// Everything the user sees of the KGC's response, plus `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KgcStatement<E: Backend> {
    pub y: Vec<E::Scalar>,
    pub a1: E::G,
    pub a2: E::G,
    pub w2: E::Scalar,
    pub b1: E::G,
    pub b2: E::G,
    pub b3: E::G,
    pub b4: E::G,
    pub b5: E::Scalar,
}

impl<E: Backend> KgcStatement<E> {
    /// `B1^d / (A1 B^w2) = B1^{-a} * prod M_i^{s_i}`
    fn x1(&self, pp: &PublicParams<E>) -> E::G {
        self.b1
            .pow(&self.b5)
            .div(&self.a1.op(&pp.tracer_pk.pow(&self.w2)))
    }

    /// `g0 A2 (g2 B)^w2 / B2^d = B2^a`
    fn x2(&self, pp: &PublicParams<E>) -> E::G {
        pp.g0
            .op(&self.a2)
            .op(&pp.g2_tracer().pow(&self.w2))
            .div(&self.b2.pow(&self.b5))
    }

    /// `g1 / B3^d = B3^a`
    fn x3(&self, pp: &PublicParams<E>) -> E::G {
        pp.g1.div(&self.b3.pow(&self.b5))
    }

    /// `h / B4^d = B4^a`
    fn x4(&self, pp: &PublicParams<E>) -> E::G {
        pp.h.div(&self.b4.pow(&self.b5))
    }

    /// `M_i = g0^{y_i a} * g0^{d y_i}`, built from the prover-supplied
    /// `g0^{y_i a}`.
    fn bases(&self, pp: &PublicParams<E>, mu_commit: &[E::G]) -> Vec<E::G> {
        mu_commit
            .iter()
            .zip(&self.y)
            .map(|(mu, yi)| mu.op(&pp.g0.pow(&(self.b5 * *yi))))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KgcWitness<E: Backend> {
    pub a: E::Scalar,
    pub s: Vec<E::Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KgcNonces<E: Backend> {
    pub a: E::Scalar,
    pub s: Vec<E::Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaKProof<E: Backend> {
    /// `(g0^{y_i})^{a'}`
    pub mu_commit_p: Vec<E::G>,
    pub r1p: E::G,
    pub r2p: E::G,
    pub r3p: E::G,
    pub r4p: E::G,
    pub c: E::Scalar,
    pub t_a: E::Scalar,
    pub t_s: Vec<E::Scalar>,
    /// `g0^{y_i a}`
    pub mu_commit: Vec<E::G>,
}

/// Which parts of a `SigmaK` proof check out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaKReport {
    pub challenge: bool,
    pub aux: Vec<bool>,
    pub b1: bool,
    pub b2: bool,
    pub b3: bool,
    pub b4: bool,
}

impl SigmaKReport {
    pub fn all(&self) -> bool {
        self.challenge && self.relations()
    }

    /// Every group relation, ignoring the challenge recomputation.
    pub fn relations(&self) -> bool {
        !self.aux.is_empty() && self.aux.iter().all(|&x| x) && self.b1 && self.b2 && self.b3 && self.b4
    }
}

fn sigma_k_commitments<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &KgcStatement<E>,
    mu_commit: &[E::G],
    nonces: &KgcNonces<E>,
) -> (Vec<E::G>, [E::G; 4]) {
    let mu_commit_p = stmt.y.iter().map(|yi| pp.g0.pow(yi).pow(&nonces.a)).collect();
    let r1p = stmt
        .bases(pp, mu_commit)
        .iter()
        .zip(&nonces.s)
        .fold(stmt.b1.pow(&-nonces.a), |acc, (m, si)| acc.op(&m.pow(si)));
    let r2p = stmt.b2.pow(&nonces.a);
    let r3p = stmt.b3.pow(&nonces.a);
    let r4p = stmt.b4.pow(&nonces.a);
    (mu_commit_p, [r1p, r2p, r3p, r4p])
}

/// Challenge over the commitments, the auxiliary values and the whole
/// statement.
pub fn sigma_k_challenge<E: Backend>(stmt: &KgcStatement<E>, proof: &SigmaKProof<E>) -> E::Scalar {
    let mut t = Writer::new();
    for g in &proof.mu_commit_p {
        t.element(g);
    }
    for g in &proof.mu_commit {
        t.element(g);
    }
    t.element(&stmt.b1)
        .element(&proof.r1p)
        .element(&stmt.b2)
        .element(&proof.r2p)
        .element(&stmt.b3)
        .element(&proof.r3p)
        .element(&stmt.b4)
        .element(&proof.r4p)
        .scalar(&stmt.b5)
        .element(&stmt.a1)
        .element(&stmt.a2)
        .scalar(&stmt.w2);
    for yi in &stmt.y {
        t.scalar(yi);
    }
    hash_to_scalar(SIGMA_K_TAG, &t.finish())
}

/// Builds the proof for an arbitrary challenge; `None` takes the
/// Fiat–Shamir challenge.
pub fn sigma_k_respond<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &KgcStatement<E>,
    wit: &KgcWitness<E>,
    nonces: &KgcNonces<E>,
    challenge: Option<E::Scalar>,
) -> SigmaKProof<E> {
    let mu_commit: Vec<E::G> = stmt.y.iter().map(|yi| pp.g0.pow(yi).pow(&wit.a)).collect();
    let (mu_commit_p, [r1p, r2p, r3p, r4p]) = sigma_k_commitments(pp, stmt, &mu_commit, nonces);
    let mut proof = SigmaKProof {
        mu_commit_p,
        r1p,
        r2p,
        r3p,
        r4p,
        c: E::Scalar::zero(),
        t_a: E::Scalar::zero(),
        t_s: Vec::new(),
        mu_commit,
    };
    let c = challenge.unwrap_or_else(|| sigma_k_challenge(stmt, &proof));
    proof.c = c;
    proof.t_a = nonces.a - c * wit.a;
    proof.t_s = nonces.s.iter().zip(&wit.s).map(|(n, s)| *n - c * *s).collect();
    proof
}

pub fn sigma_k_prove_with_nonces<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &KgcStatement<E>,
    wit: &KgcWitness<E>,
    nonces: &KgcNonces<E>,
) -> SigmaKProof<E> {
    sigma_k_respond(pp, stmt, wit, nonces, None)
}

pub fn sigma_k_prove<E: Backend, R: RngCore + ?Sized>(
    pp: &PublicParams<E>,
    stmt: &KgcStatement<E>,
    wit: &KgcWitness<E>,
    rng: &mut R,
) -> SigmaKProof<E> {
    let nonces = KgcNonces {
        a: E::Scalar::random(rng),
        s: (0..wit.s.len()).map(|_| E::Scalar::random(rng)).collect(),
    };
    sigma_k_prove_with_nonces(pp, stmt, wit, &nonces)
}

/// Reproducible proof with nonces derived from the witness and statement.
pub fn sigma_k_prove_deterministic<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &KgcStatement<E>,
    wit: &KgcWitness<E>,
) -> SigmaKProof<E> {
    let mut seed = Writer::new();
    seed.scalar(&wit.a)
        .scalars(&wit.s)
        .scalars(&stmt.y)
        .element(&stmt.a1)
        .element(&stmt.a2)
        .scalar(&stmt.w2)
        .element(&stmt.b1)
        .element(&stmt.b2)
        .element(&stmt.b3)
        .element(&stmt.b4)
        .scalar(&stmt.b5);
    let seed = seed.finish();
    let derive = |i: u32| {
        let mut input = seed.clone();
        input.extend_from_slice(&i.to_be_bytes());
        hash_to_scalar::<E::Scalar>(SIGMA_K_NONCE_TAG, &input)
    };
    let nonces = KgcNonces {
        a: derive(0),
        s: (0..wit.s.len() as u32).map(|i| derive(i + 1)).collect(),
    };
    sigma_k_prove_with_nonces(pp, stmt, wit, &nonces)
}

/// Evaluates every check separately. Relations use the challenge stored in
/// the proof.
pub fn sigma_k_report<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &KgcStatement<E>,
    proof: &SigmaKProof<E>,
) -> SigmaKReport {
    let l = stmt.y.len();
    let shaped = l > 0
        && proof.mu_commit_p.len() == l
        && proof.mu_commit.len() == l
        && proof.t_s.len() == l;
    if !shaped {
        return SigmaKReport {
            challenge: false,
            aux: vec![false; l.max(1)],
            b1: false,
            b2: false,
            b3: false,
            b4: false,
        };
    }
    let c = &proof.c;
    let aux = stmt
        .y
        .iter()
        .zip(proof.mu_commit.iter().zip(&proof.mu_commit_p))
        .map(|(yi, (mu, mu_p))| *mu_p == pp.g0.pow(yi).pow(&proof.t_a).op(&mu.pow(c)))
        .collect();
    let b1 = proof.r1p
        == stmt
            .bases(pp, &proof.mu_commit)
            .iter()
            .zip(&proof.t_s)
            .fold(stmt.b1.pow(&-proof.t_a), |acc, (m, t)| acc.op(&m.pow(t)))
            .op(&stmt.x1(pp).pow(c));
    let b2 = proof.r2p == stmt.b2.pow(&proof.t_a).op(&stmt.x2(pp).pow(c));
    let b3 = proof.r3p == stmt.b3.pow(&proof.t_a).op(&stmt.x3(pp).pow(c));
    let b4 = proof.r4p == stmt.b4.pow(&proof.t_a).op(&stmt.x4(pp).pow(c));
    SigmaKReport {
        challenge: sigma_k_challenge(stmt, proof) == proof.c,
        aux,
        b1,
        b2,
        b3,
        b4,
    }
}

pub fn sigma_k_verify<E: Backend>(
    pp: &PublicParams<E>,
    stmt: &KgcStatement<E>,
    proof: &SigmaKProof<E>,
) -> bool {
    sigma_k_report(pp, stmt, proof).all()
}

impl<E: Backend> Encode for SigmaUProof<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.element(&self.a1_commit)
            .element(&self.a2_commit)
            .scalar(&self.c)
            .scalar(&self.t_tau)
            .scalar(&self.t_theta)
            .scalar(&self.t_w1);
    }
}

impl<E: Backend> Decode for SigmaUProof<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(SigmaUProof {
            a1_commit: r.element()?,
            a2_commit: r.element()?,
            c: r.scalar()?,
            t_tau: r.scalar()?,
            t_theta: r.scalar()?,
            t_w1: r.scalar()?,
        })
    }
}

impl<E: Backend> Encode for SigmaKProof<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.elements(&self.mu_commit_p)
            .element(&self.r1p)
            .element(&self.r2p)
            .element(&self.r3p)
            .element(&self.r4p)
            .scalar(&self.c)
            .scalar(&self.t_a)
            .scalars(&self.t_s)
            .elements(&self.mu_commit);
    }
}

impl<E: Backend> Decode for SigmaKProof<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let mu_commit_p: Vec<E::G> = r.elements()?;
        let l = mu_commit_p.len();
        let proof = SigmaKProof {
            mu_commit_p,
            r1p: r.element()?,
            r2p: r.element()?,
            r3p: r.element()?,
            r4p: r.element()?,
            c: r.scalar()?,
            t_a: r.scalar()?,
            t_s: r.scalars()?,
            mu_commit: r.elements()?,
        };
        expect_len(l, proof.t_s.len())?;
        expect_len(l, proof.mu_commit.len())?;
        Ok(proof)
    }
}
