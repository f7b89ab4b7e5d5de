//! Argument definitions and subcommand dispatch for the `pptfe` binary.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use pptfe_core::scheme::{self, DEFAULT_DLOG_BOUND};
use pptfe_core::store::{self, Artifact, ArtifactKind, StoreError};
use pptfe_core::{
    Backend, BackendId, Ciphertext, Curve, Error as CoreError, IdentityRegistry, KeyContext,
    KeyFile, MasterSecretKey, PublicParams, ScalarField, Toy, TracerSecret,
};
use pptfe_net::{ClientError, ServerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bench::{self, BenchError};

#[derive(Debug, Parser)]
#[command(name = "pptfe", version, about = "Traceable inner-product functional encryption")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate public parameters, master secret and tracer secret.
    Setup(SetupArgs),
    /// Encrypt an integer vector.
    Encrypt(EncryptArgs),
    /// Issue a key directly from the master secret.
    Keygen(KeygenArgs),
    /// Check a key against the public parameters.
    VerifyKey(VerifyKeyArgs),
    /// Recover the inner product from a ciphertext.
    Decrypt(DecryptArgs),
    /// Find which registered identity a key belongs to.
    Trace(TraceArgs),
    /// Run the blind issuance server.
    KgcServe(ServeArgs),
    /// Obtain a key from an issuance server without revealing the identity.
    RequestKey(RequestKeyArgs),
    /// Add a labelled identity to the tracer's registry.
    RegisterId(RegisterArgs),
    /// Time every algorithm over a grid of dimensions.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value = "curve")]
    pub backend: BackendId,
    /// Deterministic randomness (toy backend only).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving params.bin, msk.bin and tsk.bin.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Comma-separated integers.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x: Vec<i64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub msk: PathBuf,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub y: Vec<i64>,
    #[arg(long)]
    pub theta: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyKeyArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub ct: PathBuf,
    /// Largest absolute inner product searched for.
    #[arg(long, default_value_t = DEFAULT_DLOG_BOUND)]
    pub bound: u64,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub tsk: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub registry: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub msk: PathBuf,
    #[arg(long, env = "PPTFE_LISTEN", default_value = "127.0.0.1:7878")]
    pub listen: String,
    #[arg(long, env = "PPTFE_MAX_SESSIONS", default_value_t = 64)]
    pub max_sessions: usize,
    /// Seconds a client may take to send its request.
    #[arg(long, default_value_t = 30)]
    pub read_timeout: u64,
}

#[derive(Debug, Args)]
pub struct RequestKeyArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub connect: String,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub y: Vec<i64>,
    #[arg(long)]
    pub theta: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub theta: u64,
    /// Backend of a registry being created; existing registries keep theirs.
    #[arg(long, default_value = "curve")]
    pub backend: BackendId,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "curve")]
    pub backend: BackendId,
    #[arg(long, value_delimiter = ',', default_values_t = bench::DEFAULT_DIMS)]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = bench::MIN_REPS)]
    pub reps: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Failure families, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Crypto(String),
    #[error("{0}")]
    Protocol(String),
    #[error("{0}")]
    OutOfRange(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Format(_) => 2,
            CliError::Crypto(_) => 3,
            CliError::Protocol(_) => 4,
            CliError::OutOfRange(_) => 5,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Format(_) => "io",
            CliError::Crypto(_) => "verification",
            CliError::Protocol(_) => "protocol",
            CliError::OutOfRange(_) => "out-of-range",
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::ZeroDimension
            | CoreError::Dimension { .. }
            | CoreError::ZeroIdentity
            | CoreError::DegenerateRandomness => CliError::Usage(msg),
            CoreError::DlogOutOfRange(_) | CoreError::TraceNotFound => CliError::OutOfRange(msg),
            CoreError::InvalidUserProof | CoreError::Issuance(_) => CliError::Crypto(msg),
            CoreError::Decode(_) => CliError::Format(msg),
        }
    }
}

impl From<ClientError> for CliError {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Issuance(inner) => inner.into(),
            other => CliError::Protocol(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Scheme(inner) => inner.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn emit(v: Value) {
    println!("{v}");
}

fn rng_for<E: Backend>(seed: Option<u64>) -> Result<ChaCha20Rng, CliError> {
    match seed {
        None => Ok(ChaCha20Rng::from_entropy()),
        Some(s) if E::ID == BackendId::Toy => Ok(ChaCha20Rng::seed_from_u64(s)),
        Some(_) => Err(CliError::Usage("--seed is only accepted with the toy backend".into())),
    }
}

fn scalars<E: Backend>(v: &[i64]) -> Vec<E::Scalar> {
    v.iter().map(|&x| E::Scalar::from_i64(x)).collect()
}

fn identity<E: Backend>(theta: u64) -> Result<E::Scalar, CliError> {
    let s = E::Scalar::from_u64(theta);
    if s.is_zero() {
        return Err(CliError::Usage("identity must be nonzero modulo the group order".into()));
    }
    Ok(s)
}

fn show_scalar<S: ScalarField>(s: &S) -> String {
    match s.to_u64() {
        Some(v) => v.to_string(),
        None => s.to_bytes().iter().map(|b| format!("{b:02x}")).collect(),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn backend_of(path: &Path, kind: ArtifactKind) -> Result<BackendId, CliError> {
    let header = store::read_header(path)?;
    if header.kind != kind {
        return Err(StoreError::ArtifactType { expected: kind, found: header.kind }.into());
    }
    Ok(header.backend)
}

fn load<A: Artifact>(path: &Path) -> Result<A, CliError> {
    store::read_artifact(path).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn check_dim<E: Backend>(pp: &PublicParams<E>, got: usize, what: &str) -> CliResult {
    if got != pp.dimension() {
        return Err(CliError::Usage(format!(
            "{what} has dimension {got}, parameters have {}",
            pp.dimension()
        )));
    }
    Ok(())
}

macro_rules! dispatch {
    ($backend:expr, $f:ident ( $($arg:expr),* )) => {
        match $backend {
            BackendId::Toy => $f::<Toy>($($arg),*),
            BackendId::Curve => $f::<Curve>($($arg),*),
        }
    };
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Setup(a) => dispatch!(a.backend, setup(&a)),
        Command::Encrypt(a) => dispatch!(backend_of(&a.params, ArtifactKind::Params)?, encrypt(&a)),
        Command::Keygen(a) => dispatch!(backend_of(&a.params, ArtifactKind::Params)?, keygen(&a)),
        Command::VerifyKey(a) => dispatch!(backend_of(&a.params, ArtifactKind::Params)?, verify_key(&a)),
        Command::Decrypt(a) => dispatch!(backend_of(&a.params, ArtifactKind::Params)?, decrypt(&a)),
        Command::Trace(a) => dispatch!(backend_of(&a.params, ArtifactKind::Params)?, trace(&a)),
        Command::KgcServe(a) => dispatch!(backend_of(&a.params, ArtifactKind::Params)?, serve(&a)),
        Command::RequestKey(a) => dispatch!(backend_of(&a.params, ArtifactKind::Params)?, request_key(&a)),
        Command::RegisterId(a) => {
            let backend = if a.registry.exists() {
                backend_of(&a.registry, ArtifactKind::Registry)?
            } else {
                a.backend
            };
            dispatch!(backend, register(&a))
        }
        Command::Bench(a) => dispatch!(a.backend, run_bench(&a)),
    }
}

fn setup<E: Backend>(a: &SetupArgs) -> CliResult {
    let mut rng = rng_for::<E>(a.seed)?;
    let (pp, msk, tsk) = scheme::setup::<E, _>(a.dim, &mut rng)?;
    fs::create_dir_all(&a.out)?;
    let params = a.out.join("params.bin");
    let msk_path = a.out.join("msk.bin");
    let tsk_path = a.out.join("tsk.bin");
    store::write_artifact(&params, &pp)?;
    store::write_artifact(&msk_path, &msk)?;
    store::write_artifact(&tsk_path, &tsk)?;
    emit(json!({
        "command": "setup",
        "backend": E::ID.name(),
        "dim": a.dim,
        "params": path_str(&params),
        "msk": path_str(&msk_path),
        "tsk": path_str(&tsk_path),
    }));
    Ok(())
}

fn encrypt<E: Backend>(a: &EncryptArgs) -> CliResult {
    let pp: PublicParams<E> = load(&a.params)?;
    check_dim(&pp, a.x.len(), "plaintext")?;
    let mut rng = rng_for::<E>(a.seed)?;
    let ct = scheme::encrypt(&pp, &scalars::<E>(&a.x), &mut rng)?;
    store::write_artifact(&a.out, &ct)?;
    emit(json!({ "command": "encrypt", "ct": path_str(&a.out), "elements": ct.element_count() }));
    Ok(())
}

fn keygen<E: Backend>(a: &KeygenArgs) -> CliResult {
    let pp: PublicParams<E> = load(&a.params)?;
    let msk: MasterSecretKey<E> = load(&a.msk)?;
    check_dim(&pp, a.y.len(), "function vector")?;
    check_dim(&pp, msk.dimension(), "master secret")?;
    let mut rng = rng_for::<E>(a.seed)?;
    let ctx = KeyContext::new(scalars::<E>(&a.y), identity::<E>(a.theta)?)?;
    let key = scheme::keygen(&pp, &msk, &ctx, &mut rng)?;
    store::write_artifact(&a.out, &KeyFile { key, ctx })?;
    emit(json!({ "command": "keygen", "key": path_str(&a.out) }));
    Ok(())
}

fn verify_key<E: Backend>(a: &VerifyKeyArgs) -> CliResult {
    let pp: PublicParams<E> = load(&a.params)?;
    let kf: KeyFile<E> = load(&a.key)?;
    check_dim(&pp, kf.ctx.dimension(), "key")?;
    let valid = scheme::verify_key(&pp, &kf.key, &kf.ctx);
    emit(json!({ "command": "verify-key", "valid": valid }));
    if valid {
        Ok(())
    } else {
        Err(CliError::Crypto("key does not verify against these parameters".into()))
    }
}

fn decrypt<E: Backend>(a: &DecryptArgs) -> CliResult {
    let pp: PublicParams<E> = load(&a.params)?;
    let kf: KeyFile<E> = load(&a.key)?;
    let ct: Ciphertext<E> = load(&a.ct)?;
    check_dim(&pp, kf.ctx.dimension(), "key")?;
    check_dim(&pp, ct.dimension(), "ciphertext")?;
    let value = scheme::decrypt(&pp, &kf.key, &kf.ctx, &ct, a.bound)?;
    emit(json!({ "command": "decrypt", "value": value }));
    Ok(())
}

fn trace<E: Backend>(a: &TraceArgs) -> CliResult {
    let pp: PublicParams<E> = load(&a.params)?;
    let tsk: TracerSecret<E> = load(&a.tsk)?;
    let kf: KeyFile<E> = load(&a.key)?;
    let registry: IdentityRegistry<E> = load(&a.registry)?;
    let theta = scheme::trace(&pp, &tsk, &kf.key, &registry.candidates())?;
    emit(json!({
        "command": "trace",
        "theta": show_scalar(&theta),
        "label": registry.resolve(&theta),
    }));
    Ok(())
}

fn serve<E: Backend>(a: &ServeArgs) -> CliResult {
    let pp: PublicParams<E> = load(&a.params)?;
    let msk: MasterSecretKey<E> = load(&a.msk)?;
    check_dim(&pp, msk.dimension(), "master secret")?;
    if a.max_sessions == 0 {
        return Err(CliError::Usage("--max-sessions must be at least 1".into()));
    }
    let config = ServerConfig {
        max_sessions: a.max_sessions,
        read_timeout: Duration::from_secs(a.read_timeout),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let mut handle = pptfe_net::serve(pp, msk, a.listen.as_str(), config)
            .await
            .map_err(|e| CliError::Protocol(format!("cannot listen on {}: {e}", a.listen)))?;
        let addr: SocketAddr = handle.local_addr();
        emit(json!({ "event": "listening", "addr": addr.to_string(), "backend": E::ID.name() }));
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = handle.wait() => {}
        }
        let log = handle.shutdown().await;
        let issued = log
            .iter()
            .filter(|r| r.outcome == pptfe_net::SessionOutcome::Issued)
            .count();
        emit(json!({ "event": "stopped", "sessions": log.len(), "issued": issued }));
        Ok(())
    })
}

fn request_key<E: Backend>(a: &RequestKeyArgs) -> CliResult {
    let pp: PublicParams<E> = load(&a.params)?;
    check_dim(&pp, a.y.len(), "function vector")?;
    let theta = identity::<E>(a.theta)?;
    let y = scalars::<E>(&a.y);
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    let key = runtime.block_on(pptfe_net::request_key(
        &pp,
        a.connect.as_str(),
        theta,
        y.clone(),
        Duration::from_secs(a.timeout),
    ))?;
    store::write_artifact(&a.out, &KeyFile { key, ctx: KeyContext { y, theta } })?;
    emit(json!({ "command": "request-key", "key": path_str(&a.out) }));
    Ok(())
}

fn register<E: Backend>(a: &RegisterArgs) -> CliResult {
    let mut registry: IdentityRegistry<E> = if a.registry.exists() {
        load(&a.registry)?
    } else {
        IdentityRegistry::new()
    };
    registry
        .register_identity(&a.label, identity::<E>(a.theta)?)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    store::write_artifact(&a.registry, &registry)?;
    emit(json!({
        "command": "register-id",
        "registry": path_str(&a.registry),
        "label": a.label,
        "entries": registry.len(),
    }));
    Ok(())
}

fn run_bench<E: Backend>(a: &BenchArgs) -> CliResult {
    let mut rng = rng_for::<E>(a.seed)?;
    let report = bench::run_bench::<E, _>(&a.dims, a.reps, &mut rng, |row| {
        emit(json!({ "event": "row", "row": row }));
    })?;
    if let Some(path) = &a.csv {
        report
            .write_csv(fs::File::create(path)?)
            .map_err(|e| CliError::Format(e.to_string()))?;
    }
    let shape = report.shape();
    if let Some(path) = &a.json {
        let doc = json!({ "report": report, "shape": shape });
        fs::write(path, serde_json::to_vec_pretty(&doc).expect("report serializes"))?;
    }
    emit(json!({ "event": "shape", "shape": shape, "passes": shape.passes() }));
    Ok(())
}
