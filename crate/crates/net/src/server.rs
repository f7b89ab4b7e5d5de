//! KGC issuance server.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime};

use log::{info, warn};
use pptfe_core::issuance::{kgc_respond, Msg1};
use pptfe_core::{Backend, Decode, Encode, Error as CoreError, MasterSecretKey, PublicParams};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::sync::{watch, Semaphore};
use tokio::task::JoinSet;

use crate::frame::{codes, read_frame, write_frame, Frame, FrameError, MsgType};

#[derive(Clone, Debug)]
pub struct ServerConfig {
    /// Sessions processed at once; further connections wait their turn.
    pub max_sessions: usize,
    /// How long a client may take to send its request.
    pub read_timeout: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { max_sessions: 64, read_timeout: Duration::from_secs(30) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbortReason {
    /// Unreadable, oversized or unexpected frame, or an undecodable request.
    Malformed,
    UserProofRejected,
    Timeout,
    Internal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionOutcome {
    Issued,
    Aborted(AbortReason),
}

/// What the server remembers about a session. Deliberately carries nothing
/// about the requester or the messages exchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionRecord {
    pub id: u64,
    pub started: SystemTime,
    pub finished: SystemTime,
    pub outcome: SessionOutcome,
}

#[derive(Clone, Default, Debug)]
pub struct SessionLog(Arc<Mutex<Vec<SessionRecord>>>);

impl SessionLog {
    fn push(&self, record: SessionRecord) {
        self.0.lock().expect("session log poisoned").push(record);
    }

    pub fn snapshot(&self) -> Vec<SessionRecord> {
        self.0.lock().expect("session log poisoned").clone()
    }
}

pub struct ServerHandle {
    local_addr: SocketAddr,
    shutdown: watch::Sender<bool>,
    task: tokio::task::JoinHandle<()>,
    log: SessionLog,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn session_log(&self) -> Vec<SessionRecord> {
        self.log.snapshot()
    }

    /// Stops accepting connections and waits for in-flight sessions.
    pub async fn shutdown(self) -> Vec<SessionRecord> {
        let _ = self.shutdown.send(true);
        let _ = self.task.await;
        self.log.snapshot()
    }

    /// Resolves when the accept loop has exited.
    pub async fn wait(&mut self) {
        let _ = (&mut self.task).await;
    }
}

/// Binds `addr` and serves issuance requests until shut down.
pub async fn serve<E: Backend>(
    pp: PublicParams<E>,
    msk: MasterSecretKey<E>,
    addr: impl ToSocketAddrs,
    config: ServerConfig,
) -> std::io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr).await?;
    let local_addr = listener.local_addr()?;
    let (tx, rx) = watch::channel(false);
    let log = SessionLog::default();
    let ctx = Arc::new(Shared { pp, msk, config, log: log.clone() });
    let task = tokio::spawn(accept_loop(listener, ctx, rx));
    info!("issuance server listening on {local_addr}");
    Ok(ServerHandle { local_addr, shutdown: tx, task, log })
}

struct Shared<E: Backend> {
    pp: PublicParams<E>,
    msk: MasterSecretKey<E>,
    config: ServerConfig,
    log: SessionLog,
}

async fn accept_loop<E: Backend>(
    listener: TcpListener,
    ctx: Arc<Shared<E>>,
    mut shutdown: watch::Receiver<bool>,
) {
    let permits = Arc::new(Semaphore::new(ctx.config.max_sessions.max(1)));
    let mut sessions = JoinSet::new();
    let mut next_id = 0u64;
    loop {
        tokio::select! {
            _ = shutdown.changed() => break,
            accepted = listener.accept() => {
                let (stream, _) = match accepted {
                    Ok(conn) => conn,
                    Err(e) => {
                        warn!("accept failed: {e}");
                        continue;
                    }
                };
                let permit = tokio::select! {
                    _ = shutdown.changed() => break,
                    p = permits.clone().acquire_owned() => p.expect("semaphore closed"),
                };
                next_id += 1;
                let id = next_id;
                let ctx = ctx.clone();
                sessions.spawn(async move {
                    let started = SystemTime::now();
                    let outcome = handle_session(stream, &ctx).await;
                    let record = SessionRecord { id, started, finished: SystemTime::now(), outcome };
                    info!("session {id}: {:?}", record.outcome);
                    ctx.log.push(record);
                    drop(permit);
                });
            }
            Some(_) = sessions.join_next(), if !sessions.is_empty() => {}
        }
    }
    while sessions.join_next().await.is_some() {}
    info!("issuance server stopped");
}

async fn handle_session<E: Backend>(mut stream: TcpStream, ctx: &Arc<Shared<E>>) -> SessionOutcome {
    let backend = E::ID;
    let frame = match tokio::time::timeout(ctx.config.read_timeout, read_frame(&mut stream)).await {
        Err(_) => return SessionOutcome::Aborted(AbortReason::Timeout),
        Ok(Err(FrameError::Io(_))) => return SessionOutcome::Aborted(AbortReason::Malformed),
        Ok(Err(e)) => return reject(&mut stream, backend, codes::MALFORMED, &e.to_string(), AbortReason::Malformed).await,
        Ok(Ok(f)) => f,
    };
    if frame.backend != backend {
        let detail = format!("server runs the {backend} backend");
        return reject(&mut stream, backend, codes::MALFORMED, &detail, AbortReason::Malformed).await;
    }
    if frame.msg_type != MsgType::IssueRequest {
        return reject(&mut stream, backend, codes::MALFORMED, "expected an issuance request", AbortReason::Malformed).await;
    }
    let msg1 = match Msg1::<E>::from_bytes(&frame.payload) {
        Ok(m) => m,
        Err(e) => return reject(&mut stream, backend, codes::MALFORMED, &e.to_string(), AbortReason::Malformed).await,
    };

    let shared = ctx.clone();
    let result = tokio::task::spawn_blocking(move || {
        kgc_respond(&shared.pp, &shared.msk, &msg1, &mut rand::thread_rng())
    })
    .await;
    let msg2 = match result {
        Ok(Ok(m)) => m,
        Ok(Err(CoreError::InvalidUserProof)) => {
            return reject(&mut stream, backend, codes::USER_PROOF_REJECTED, "user proof rejected", AbortReason::UserProofRejected).await
        }
        Ok(Err(e @ CoreError::Dimension { .. })) => {
            return reject(&mut stream, backend, codes::MALFORMED, &e.to_string(), AbortReason::Malformed).await
        }
        Ok(Err(_)) | Err(_) => {
            return reject(&mut stream, backend, codes::INTERNAL, "internal error", AbortReason::Internal).await
        }
    };

    let reply = Frame::new(backend, MsgType::IssueResponse, msg2.to_bytes());
    match write_frame(&mut stream, &reply).await {
        Ok(()) => SessionOutcome::Issued,
        Err(_) => SessionOutcome::Aborted(AbortReason::Internal),
    }
}

async fn reject(
    stream: &mut TcpStream,
    backend: pptfe_core::BackendId,
    code: u16,
    detail: &str,
    reason: AbortReason,
) -> SessionOutcome {
    // the peer may already be gone; the outcome is the same either way
    let _ = write_frame(stream, &Frame::error(backend, code, detail)).await;
    let _ = stream.shutdown().await;
    // swallow unread input so closing does not reset the connection before
    // the peer has read the error frame
    let _ = tokio::time::timeout(Duration::from_millis(500), async {
        let mut sink = [0u8; 8192];
        while matches!(stream.read(&mut sink).await, Ok(n) if n > 0) {}
    })
    .await;
    SessionOutcome::Aborted(reason)
}
