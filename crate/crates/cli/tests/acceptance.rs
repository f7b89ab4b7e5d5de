//! End-to-end acceptance checks. Runs sequentially and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pptfe_cli::bench::{self, Algorithm};
use pptfe_core::backend::counters;
use pptfe_core::issuance::{
    kgc_respond, kgc_respond_with, user_finalize, user_round1, user_round1_with, KgcRandomness,
    Msg1, Msg2, UserRandomness,
};
use pptfe_core::scheme::{
    encrypt, keygen, keygen_with, setup, trace, trace_target, verify_key, Decryptor, DEFAULT_DLOG_BOUND,
};
use pptfe_core::sigma::{KgcNonces, UserNonces};
use pptfe_core::{
    Backend, Curve, Encode, Error, FunctionalKey, GroupElement, IssueStage, KeyContext,
    MasterSecretKey, PublicParams, ScalarField, Toy, TracerSecret,
};
use pptfe_net::{codes, request_key, serve, ClientError, Frame, MsgType, ServerConfig};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;

type S = <Toy as Backend>::Scalar;
type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small_vec<E: Backend>(l: usize, rng: &mut impl RngCore) -> (Vec<i64>, Vec<E::Scalar>) {
    let ints: Vec<i64> = (0..l).map(|_| rng.gen_range(0..=50)).collect();
    let scalars = ints.iter().map(|&v| E::Scalar::from_i64(v)).collect();
    (ints, scalars)
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let mut total = 0;
    for l in [1usize, 10, 50] {
        let (pp, msk, _) = setup::<Toy, _>(l, &mut rng).map_err(|e| e.to_string())?;
        let dec = Decryptor::new(&pp, DEFAULT_DLOG_BOUND);
        for _ in 0..200 {
            let (xi, x) = small_vec::<Toy>(l, &mut rng);
            let (yi, y) = small_vec::<Toy>(l, &mut rng);
            let theta = S::random_nonzero(&mut rng);
            let ctx = KeyContext::new(y, theta).map_err(|e| e.to_string())?;
            let key = keygen(&pp, &msk, &ctx, &mut rng).map_err(|e| e.to_string())?;
            let ct = encrypt(&pp, &x, &mut rng).map_err(|e| e.to_string())?;
            let expected: i64 = xi.iter().zip(&yi).map(|(a, b)| a * b).sum();
            let got = dec.decrypt(&pp, &key, &ctx, &ct).map_err(|e| e.to_string())?;
            ensure(got == expected, || format!("l={l}: decrypted {got}, expected {expected}"))?;
            total += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:.1?}, limit 30s"))?;
    Ok(format!("{total} decryptions exact, {elapsed:.1?}"))
}

fn trace_recovery() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(102);
    type C = <Curve as Backend>::Scalar;
    let (pp, msk, tsk) = setup::<Curve, _>(3, &mut rng).map_err(|e| e.to_string())?;
    let mut found = 0;
    let mut bottom = 0;
    for _ in 0..100 {
        let mut registry: Vec<C> = (0..50).map(|_| C::random_nonzero(&mut rng)).collect();
        let pos = rng.gen_range(0..50);
        let theta = registry[pos];
        let y = (0..3).map(|_| C::random(&mut rng)).collect();
        let key = keygen(&pp, &msk, &KeyContext::new(y, theta).unwrap(), &mut rng).map_err(|e| e.to_string())?;
        let target = trace_target(&pp, &tsk, &key);
        let hits: Vec<usize> = (0..50).filter(|&i| target.matches(&registry[i])).collect();
        ensure(hits == vec![pos], || format!("matches at {hits:?}, true identity at {pos}"))?;
        ensure(trace(&pp, &tsk, &key, &registry) == Ok(theta), || "identity not recovered".into())?;
        found += 1;

        registry[pos] = C::random_nonzero(&mut rng);
        ensure(trace(&pp, &tsk, &key, &registry) == Err(Error::TraceNotFound), || {
            "excluded identity still traced".into()
        })?;
        bottom += 1;
    }
    Ok(format!("{found}/100 recovered among 50 candidates, {bottom}/100 without the owner give no match (curve)"))
}

fn issuance_equivalence() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(103);
    type C = <Curve as Backend>::Scalar;
    let l = 5;
    let (pp, msk, _) = setup::<Curve, _>(l, &mut rng).map_err(|e| e.to_string())?;
    for i in 0..100 {
        let theta = C::random_nonzero(&mut rng);
        let y: Vec<C> = (0..l).map(|_| C::random(&mut rng)).collect();
        let user = UserRandomness::<Curve>::random(&mut rng);
        let kgc = KgcRandomness::<Curve> {
            w2: C::random(&mut rng),
            d: C::random(&mut rng),
            nonces: KgcNonces { a: C::random(&mut rng), s: (0..l).map(|_| C::random(&mut rng)).collect() },
        };
        let (state, msg1) = user_round1_with(&pp, theta, y.clone(), &user).map_err(|e| e.to_string())?;
        let msg2 = kgc_respond_with(&pp, &msk, &msg1, &kgc).map_err(|e| e.to_string())?;
        let issued = user_finalize(&pp, &state, &msg2).map_err(|e| format!("session {i}: {e}"))?;
        let ctx = KeyContext::new(y, theta).unwrap();
        let direct = keygen_with(&pp, &msk, &ctx, &(user.w1 + kgc.w2), &kgc.d).map_err(|e| e.to_string())?;
        ensure(issued.k1 == direct.k1, || format!("session {i}: K1 differs"))?;
        ensure(issued.k2 == direct.k2, || format!("session {i}: K2 differs"))?;
        ensure(issued.k3 == direct.k3, || format!("session {i}: K3 differs"))?;
        ensure(issued.k4 == direct.k4, || format!("session {i}: K4 differs"))?;
        ensure(issued.k5 == direct.k5, || format!("session {i}: K5 differs"))?;
    }
    Ok("100 sessions field-identical to direct key generation (curve, l=5)".into())
}

fn perturb_g<E: Backend>(g: &E::G, rng: &mut impl RngCore) -> E::G {
    loop {
        let r = E::random_element(rng);
        if !r.is_identity() {
            return g.op(&r);
        }
    }
}

fn perturb_s<E: Backend>(s: &E::Scalar, rng: &mut impl RngCore) -> E::Scalar {
    *s + E::Scalar::random_nonzero(rng)
}

fn pick<'a, T>(v: &'a mut [T], rng: &mut impl RngCore) -> &'a mut T {
    let i = rng.gen_range(0..v.len());
    &mut v[i]
}

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, name: &str, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures.push(name.to_owned());
        }
    }
}

type Msg1Mutation<E> = (&'static str, fn(&mut Msg1<E>, &mut ChaCha20Rng));

fn msg1_mutations<E: Backend>() -> Vec<Msg1Mutation<E>> {
    vec![
        ("msg1.a1", |m, r| m.a1 = perturb_g::<E>(&m.a1, r)),
        ("msg1.a2", |m, r| m.a2 = perturb_g::<E>(&m.a2, r)),
        ("sigma_u.a1_commit", |m, r| m.proof_u.a1_commit = perturb_g::<E>(&m.proof_u.a1_commit, r)),
        ("sigma_u.a2_commit", |m, r| m.proof_u.a2_commit = perturb_g::<E>(&m.proof_u.a2_commit, r)),
        ("sigma_u.c", |m, r| m.proof_u.c = perturb_s::<E>(&m.proof_u.c, r)),
        ("sigma_u.t_tau", |m, r| m.proof_u.t_tau = perturb_s::<E>(&m.proof_u.t_tau, r)),
        ("sigma_u.t_theta", |m, r| m.proof_u.t_theta = perturb_s::<E>(&m.proof_u.t_theta, r)),
        ("sigma_u.t_w1", |m, r| m.proof_u.t_w1 = perturb_s::<E>(&m.proof_u.t_w1, r)),
    ]
}

type Msg2Mutation<E> = (&'static str, fn(&mut Msg2<E>, &mut ChaCha20Rng));

fn msg2_mutations<E: Backend>() -> Vec<Msg2Mutation<E>> {
    vec![
        ("msg2.w2", |m, r| m.w2 = perturb_s::<E>(&m.w2, r)),
        ("msg2.b1", |m, r| m.b1 = perturb_g::<E>(&m.b1, r)),
        ("msg2.b2", |m, r| m.b2 = perturb_g::<E>(&m.b2, r)),
        ("msg2.b3", |m, r| m.b3 = perturb_g::<E>(&m.b3, r)),
        ("msg2.b4", |m, r| m.b4 = perturb_g::<E>(&m.b4, r)),
        ("msg2.b5", |m, r| m.b5 = perturb_s::<E>(&m.b5, r)),
        ("sigma_k.mu_commit_p", |m, r| {
            let g = pick(&mut m.proof_k.mu_commit_p, r);
            *g = perturb_g::<E>(g, r);
        }),
        ("sigma_k.r1p", |m, r| m.proof_k.r1p = perturb_g::<E>(&m.proof_k.r1p, r)),
        ("sigma_k.r2p", |m, r| m.proof_k.r2p = perturb_g::<E>(&m.proof_k.r2p, r)),
        ("sigma_k.r3p", |m, r| m.proof_k.r3p = perturb_g::<E>(&m.proof_k.r3p, r)),
        ("sigma_k.r4p", |m, r| m.proof_k.r4p = perturb_g::<E>(&m.proof_k.r4p, r)),
        ("sigma_k.c", |m, r| m.proof_k.c = perturb_s::<E>(&m.proof_k.c, r)),
        ("sigma_k.t_a", |m, r| m.proof_k.t_a = perturb_s::<E>(&m.proof_k.t_a, r)),
        ("sigma_k.t_s", |m, r| {
            let s = pick(&mut m.proof_k.t_s, r);
            *s = perturb_s::<E>(s, r);
        }),
        ("sigma_k.mu_commit", |m, r| {
            let g = pick(&mut m.proof_k.mu_commit, r);
            *g = perturb_g::<E>(g, r);
        }),
    ]
}

type KeyMutation<E> = (&'static str, fn(&mut FunctionalKey<E>, &mut ChaCha20Rng));

fn key_mutations<E: Backend>() -> Vec<KeyMutation<E>> {
    vec![
        ("key.k1", |k, r| k.k1 = perturb_g::<E>(&k.k1, r)),
        ("key.k2", |k, r| k.k2 = perturb_g::<E>(&k.k2, r)),
        ("key.k3", |k, r| k.k3 = perturb_g::<E>(&k.k3, r)),
        ("key.k4", |k, r| k.k4 = perturb_s::<E>(&k.k4, r)),
        ("key.k5", |k, r| k.k5 = perturb_s::<E>(&k.k5, r)),
    ]
}

/// Every single-field mutation of one honest session, each checked at the
/// stage that should catch it.
fn mutate_session<E: Backend>(
    pp: &PublicParams<E>,
    msk: &MasterSecretKey<E>,
    rng: &mut ChaCha20Rng,
    tally: &mut Tally,
) -> Result<(), String> {
    let l = pp.dimension();
    let theta = E::Scalar::random_nonzero(rng);
    let y: Vec<E::Scalar> = (0..l).map(|_| E::Scalar::random(rng)).collect();
    let (state, msg1) = user_round1(pp, theta, y.clone(), rng).map_err(|e| e.to_string())?;
    let msg2 = kgc_respond(pp, msk, &msg1, rng).map_err(|e| e.to_string())?;
    let key = user_finalize(pp, &state, &msg2).map_err(|e| e.to_string())?;
    let ctx = KeyContext::new(y, theta).unwrap();

    // the KGC checks the user's proof before doing anything else
    for (name, f) in msg1_mutations::<E>() {
        let mut m = msg1.clone();
        f(&mut m, rng);
        let res = kgc_respond(pp, msk, &m, rng);
        tally.check(name, matches!(res, Err(Error::InvalidUserProof)));
    }
    // y is public in the request; a KGC answering a different y is caught by
    // the user's proof check
    {
        let mut m = msg1.clone();
        let yi = pick(&mut m.y, rng);
        *yi = perturb_s::<E>(yi, rng);
        let res = kgc_respond(pp, msk, &m, rng).and_then(|m2| user_finalize(pp, &state, &m2));
        tally.check("msg1.y", res == Err(Error::Issuance(IssueStage::Proof)));
    }
    for (name, f) in msg2_mutations::<E>() {
        let mut m = msg2.clone();
        f(&mut m, rng);
        let res = user_finalize(pp, &state, &m);
        tally.check(name, res == Err(Error::Issuance(IssueStage::Proof)));
    }
    for (name, f) in key_mutations::<E>() {
        let mut k = key.clone();
        f(&mut k, rng);
        tally.check(name, !verify_key(pp, &k, &ctx));
    }

    // a KGC proving honestly about the wrong secrets
    let rogue_a = MasterSecretKey { a: perturb_s::<E>(&msk.a, rng), s: msk.s.clone() };
    let m2 = kgc_respond(pp, &rogue_a, &msg1, rng).map_err(|e| e.to_string())?;
    tally.check("kgc.a", user_finalize(pp, &state, &m2) == Err(Error::Issuance(IssueStage::Pairing)));
    let mut s = msk.s.clone();
    let si = pick(&mut s, rng);
    *si = perturb_s::<E>(si, rng);
    let rogue_s = MasterSecretKey { a: msk.a, s };
    let m2 = kgc_respond(pp, &rogue_s, &msg1, rng).map_err(|e| e.to_string())?;
    tally.check("kgc.s", user_finalize(pp, &state, &m2) == Err(Error::Issuance(IssueStage::KeyVerification)));
    Ok(())
}

fn negative_suite() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(104);
    let mut tally = Tally::default();
    let (pp, msk, _) = setup::<Toy, _>(3, &mut rng).map_err(|e| e.to_string())?;
    for _ in 0..18 {
        mutate_session(&pp, &msk, &mut rng, &mut tally)?;
    }
    let toy_cases = tally.cases;
    let (pp, msk, _) = setup::<Curve, _>(3, &mut rng).map_err(|e| e.to_string())?;
    for _ in 0..4 {
        mutate_session(&pp, &msk, &mut rng, &mut tally)?;
    }
    ensure(tally.cases >= 500, || format!("only {} cases", tally.cases))?;
    ensure(tally.failures.is_empty(), || {
        format!("{} of {} mutations not rejected at the right stage: {:?}", tally.failures.len(), tally.cases, tally.failures)
    })?;
    Ok(format!(
        "{} mutations ({} toy, {} curve) all rejected at the expected stage",
        tally.cases,
        toy_cases,
        tally.cases - toy_cases
    ))
}

/// Randomness under which `theta1` produces the same first message that
/// `theta0` produced under `rnd`. Works on toy exponents directly.
fn rebase(
    pp: &PublicParams<Toy>,
    tsk: &TracerSecret<Toy>,
    theta0: S,
    theta1: S,
    rnd: &UserRandomness<Toy>,
    c: S,
) -> UserRandomness<Toy> {
    let one_b = S::one() + tsk.b;
    let w1 = (one_b * rnd.w1 + theta0 - theta1) * one_b.invert().unwrap();
    let log_b = pp.tracer_pk.exponent();
    let log_h = pp.h.exponent();
    let tau = rnd.tau + log_b * (rnd.w1 - w1) * log_h.invert().unwrap();
    let nonces = UserNonces {
        tau: rnd.nonces.tau + c * (tau - rnd.tau),
        theta: rnd.nonces.theta + c * (theta1 - theta0),
        w1: rnd.nonces.w1 + c * (w1 - rnd.w1),
    };
    UserRandomness { tau, w1, nonces }
}

fn hiding_bijection() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(105);
    for i in 0..100 {
        let (pp, _, tsk) = setup::<Toy, _>(3, &mut rng).map_err(|e| e.to_string())?;
        let theta0 = S::random_nonzero(&mut rng);
        let theta1 = S::random_nonzero(&mut rng);
        let y: Vec<S> = (0..3).map(|_| S::random(&mut rng)).collect();
        let rnd = UserRandomness::random(&mut rng);
        let (_, m0) = user_round1_with(&pp, theta0, y.clone(), &rnd).map_err(|e| e.to_string())?;
        let rebased = rebase(&pp, &tsk, theta0, theta1, &rnd, m0.proof_u.c);
        let (state1, m1) = user_round1_with(&pp, theta1, y, &rebased).map_err(|e| e.to_string())?;
        ensure(state1.theta == theta1, || format!("trial {i}: state holds the wrong identity"))?;
        ensure(m1.a2 == m0.a2, || format!("trial {i}: A2 differs"))?;
        ensure(m1.to_bytes() == m0.to_bytes(), || format!("trial {i}: first message bytes differ"))?;
    }
    Ok("100 trials: A2 and full first message byte-identical under the rebased randomness".into())
}

fn cost_counts() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(106);
    let mut lines = Vec::new();
    for l in [10usize, 50] {
        let l64 = l as u64;
        let (pp, msk, tsk) = setup::<Toy, _>(l, &mut rng).map_err(|e| e.to_string())?;
        let x = vec![S::one(); l];
        let (ct, c) = counters::measure(|| encrypt(&pp, &x, &mut rng).unwrap());
        ensure(c.exponentiations() == 2 * l64 + 3 && c.pairings == 0, || format!("l={l} encrypt: {c:?}"))?;

        let theta = S::from_u64(9);
        let ctx = KeyContext::new(vec![S::one(); l], theta).unwrap();
        let key = keygen(&pp, &msk, &ctx, &mut rng).unwrap();
        let (v, c) = counters::measure(|| pptfe_core::decrypt(&pp, &key, &ctx, &ct, 1 << 12).unwrap());
        ensure(v == l as i64, || format!("l={l} decrypt returned {v}"))?;
        ensure(c.exponentiations() == l64 + 2 && c.pairings == 5, || format!("l={l} decrypt: {c:?}"))?;

        let (t, c) = counters::measure(|| trace(&pp, &tsk, &key, &[theta]));
        ensure(t == Ok(theta), || format!("l={l} trace failed"))?;
        ensure(c.pairings == 4 && c.exponentiations() == 3, || format!("l={l} trace: {c:?}"))?;
        lines.push(format!("l={l} ok"));
    }

    for (name, g_len, s_len, key_len) in [
        ("toy", <Toy as Backend>::G::ENCODED_LEN, S::ENCODED_LEN, key_bytes::<Toy>(&mut rng)),
        (
            "curve",
            <Curve as Backend>::G::ENCODED_LEN,
            <<Curve as Backend>::Scalar as ScalarField>::ENCODED_LEN,
            key_bytes::<Curve>(&mut rng),
        ),
    ] {
        ensure(key_len == 2 * s_len + 3 * g_len, || {
            format!("{name} key is {key_len} bytes, expected 2*{s_len} + 3*{g_len}")
        })?;
    }
    Ok(format!(
        "encrypt 2l+3 E, decrypt l+2 E + 5 P, trace 4 P + 3 E, key 2 scalars + 3 group elements ({})",
        lines.join(", ")
    ))
}

fn key_bytes<E: Backend>(rng: &mut ChaCha20Rng) -> usize {
    let (pp, msk, _) = setup::<E, _>(2, rng).unwrap();
    let ctx = KeyContext::new(vec![E::Scalar::one(); 2], E::Scalar::one()).unwrap();
    keygen(&pp, &msk, &ctx, rng).unwrap().to_bytes().len()
}

fn bench_shape() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(107);
    let report = bench::run_bench::<Curve, _>(&bench::DEFAULT_DIMS, bench::MIN_REPS, &mut rng, |_| {})
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let shape = report.shape();
    let summary: Vec<String> = shape
        .growth
        .iter()
        .map(|s| format!("{} R2={:.3}{}", s.algorithm, s.r_squared, if s.monotone { "" } else { " non-monotone" }))
        .collect();
    let means: Vec<String> = report
        .series(Algorithm::Trace)
        .iter()
        .map(|r| format!("{:.2}ms", r.mean_seconds * 1e3))
        .collect();
    let detail = format!(
        "{}; trace ratio {:.2} [{}]; ppkeygen slowest: {}; {elapsed:.0?}",
        summary.join(", "),
        shape.trace_ratio,
        means.join(" "),
        shape.ppkeygen_slowest
    );
    ensure(shape.passes(), || detail.clone())?;
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:.0?}; {detail}"))?;
    Ok(detail)
}

async fn malformed_session(addr: SocketAddr, bytes: Vec<u8>) -> Result<u16, String> {
    let mut stream = TcpStream::connect(addr).await.map_err(|e| e.to_string())?;
    stream.write_all(&bytes).await.map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    tokio::time::timeout(Duration::from_secs(10), stream.read_to_end(&mut buf))
        .await
        .map_err(|_| "no reply".to_string())?
        .map_err(|e| e.to_string())?;
    let (frame, _) = Frame::decode(&buf).map_err(|e| e.to_string())?;
    if frame.msg_type != MsgType::Error {
        return Err(format!("expected an error frame, got {:?}", frame.msg_type));
    }
    frame.error_parts().map(|(code, _)| code).map_err(|e| e.to_string())
}

fn networked() -> Outcome {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        type C = <Curve as Backend>::Scalar;
        let mut rng = ChaCha20Rng::seed_from_u64(108);
        let l = 4;
        let (pp, msk, tsk) = setup::<Curve, _>(l, &mut rng).map_err(|e| e.to_string())?;
        let (small_pp, _, _) = setup::<Curve, _>(l - 1, &mut rng).map_err(|e| e.to_string())?;
        let server = serve(pp.clone(), msk, "127.0.0.1:0", ServerConfig { max_sessions: 16, ..Default::default() })
            .await
            .map_err(|e| e.to_string())?;
        let addr = server.local_addr();

        let identities: Vec<C> = (0..8).map(|_| C::random_nonzero(&mut rng)).collect();
        let y: Vec<C> = (0..l).map(|_| C::random(&mut rng)).collect();

        let (_, mut good) = user_round1(&pp, C::one(), y.clone(), &mut rng).map_err(|e| e.to_string())?;
        let request = |payload: Vec<u8>| Frame::new(pptfe_core::BackendId::Curve, MsgType::IssueRequest, payload);
        let mut bad_version = request(good.to_bytes()).encode().unwrap();
        bad_version[4] = 0x09;
        let mut wrong_backend = request(good.to_bytes()).encode().unwrap();
        wrong_backend[5] = pptfe_core::BackendId::Toy.as_byte();
        let wrong_type = Frame::new(pptfe_core::BackendId::Curve, MsgType::IssueResponse, good.to_bytes()).encode().unwrap();
        let garbage = request(vec![0xAB; 40]).encode().unwrap();
        let (_, small) = user_round1(&small_pp, C::one(), y[..l - 1].to_vec(), &mut rng).map_err(|e| e.to_string())?;
        let wrong_dim = request(small.to_bytes()).encode().unwrap();
        let mut oversize = ((pptfe_net::frame::MAX_PAYLOAD + 4) as u32).to_be_bytes().to_vec();
        oversize.extend_from_slice(&[1, 2, 1]);
        good.proof_u.t_theta = perturb_s::<Curve>(&good.proof_u.t_theta, &mut rng);
        let forged = request(good.to_bytes()).encode().unwrap();
        let malformed = vec![
            ("bad version", bad_version, codes::MALFORMED),
            ("wrong backend", wrong_backend, codes::MALFORMED),
            ("wrong message type", wrong_type, codes::MALFORMED),
            ("undecodable payload", garbage, codes::MALFORMED),
            ("wrong dimension", wrong_dim, codes::MALFORMED),
            ("oversize frame", oversize, codes::MALFORMED),
            ("forged user proof", forged, codes::USER_PROOF_REJECTED),
        ];

        let mut honest = tokio::task::JoinSet::new();
        for theta in identities.clone() {
            let pp = pp.clone();
            let y = y.clone();
            honest.spawn(async move {
                let key: Result<FunctionalKey<Curve>, ClientError> =
                    request_key(&pp, addr, theta, y, Duration::from_secs(60)).await;
                (theta, key)
            });
        }
        let mut hostile = tokio::task::JoinSet::new();
        for (name, bytes, code) in malformed {
            hostile.spawn(async move { (name, code, malformed_session(addr, bytes).await) });
        }

        let mut codes_seen = Vec::new();
        while let Some(res) = hostile.join_next().await {
            let (name, expected, got) = res.map_err(|e| e.to_string())?;
            let got = got.map_err(|e| format!("{name}: {e}"))?;
            ensure(got == expected, || format!("{name}: code 0x{got:04x}, expected 0x{expected:04x}"))?;
            codes_seen.push(format!("{name}=0x{got:04x}"));
        }
        let mut keys = 0;
        while let Some(res) = honest.join_next().await {
            let (theta, key) = res.map_err(|e| e.to_string())?;
            let key = key.map_err(|e| format!("honest session failed: {e}"))?;
            let ctx = KeyContext::new(y.clone(), theta).unwrap();
            ensure(verify_key(&pp, &key, &ctx), || "issued key does not verify".into())?;
            ensure(trace(&pp, &tsk, &key, &identities) == Ok(theta), || "issued key traced to the wrong identity".into())?;
            keys += 1;
        }
        let log = server.shutdown().await;
        let issued = log.iter().filter(|r| r.outcome == pptfe_net::SessionOutcome::Issued).count();
        ensure(keys == 8 && issued == 8, || format!("{keys} keys received, server issued {issued}"))?;
        Ok(format!("8/8 concurrent keys valid and traced; {}", codes_seen.join(", ")))
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("functional round-trip", round_trip),
        ("trace correctness", trace_recovery),
        ("blind-issuance equivalence", issuance_equivalence),
        ("proof soundness negative suite", negative_suite),
        ("hiding bijection", hiding_bijection),
        ("operation counts", cost_counts),
        ("benchmark shape", bench_shape),
        ("networked end-to-end", networked),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
