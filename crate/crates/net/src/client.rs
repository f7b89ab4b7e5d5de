//! User side of networked issuance.

use std::time::Duration;

use pptfe_core::issuance::{user_finalize, user_round1, Msg2};
use pptfe_core::{Backend, Decode, Encode, Error as CoreError, FunctionalKey, PublicParams};
use thiserror::Error;
use tokio::net::{TcpStream, ToSocketAddrs};

use crate::frame::{read_frame, write_frame, Frame, FrameError, MsgType};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(#[from] std::io::Error),
    #[error("framing error: {0}")]
    Frame(#[from] FrameError),
    #[error("timed out waiting for the server")]
    Timeout,
    #[error("server refused (code 0x{code:04x}): {detail}")]
    Remote { code: u16, detail: String },
    #[error("unexpected {0:?} frame from server")]
    UnexpectedMessage(MsgType),
    #[error("server answered for the {0} backend")]
    BackendMismatch(pptfe_core::BackendId),
    #[error("malformed response: {0}")]
    Decode(#[from] pptfe_core::DecodeError),
    #[error("issuance failed: {0}")]
    Issuance(#[from] CoreError),
}

/// Runs one blind issuance session against a KGC and returns the verified
/// key for `(y, theta)`.
pub async fn request_key<E: Backend>(
    pp: &PublicParams<E>,
    addr: impl ToSocketAddrs,
    theta: E::Scalar,
    y: Vec<E::Scalar>,
    timeout: Duration,
) -> Result<FunctionalKey<E>, ClientError> {
    let (state, msg1) = user_round1(pp, theta, y, &mut rand::thread_rng())?;
    let mut stream = tokio::time::timeout(timeout, TcpStream::connect(addr))
        .await
        .map_err(|_| ClientError::Timeout)??;
    stream.set_nodelay(true)?;
    let request = Frame::new(E::ID, MsgType::IssueRequest, msg1.to_bytes());
    write_frame(&mut stream, &request).await?;

    let reply = tokio::time::timeout(timeout, read_frame(&mut stream))
        .await
        .map_err(|_| ClientError::Timeout)??;
    if reply.backend != E::ID {
        return Err(ClientError::BackendMismatch(reply.backend));
    }
    match reply.msg_type {
        MsgType::IssueResponse => {}
        MsgType::Error => {
            let (code, detail) = reply.error_parts()?;
            return Err(ClientError::Remote { code, detail });
        }
        other => return Err(ClientError::UnexpectedMessage(other)),
    }
    let msg2 = Msg2::<E>::from_bytes(&reply.payload)?;
    Ok(user_finalize(pp, &state, &msg2)?)
}
