//! Length-prefixed frames.
//!
//! ```text
//! length (4, BE) | version (1) | backend (1) | msg_type (1) | payload
//! ```
//!
//! `length` counts everything after itself, i.e. `3 + payload.len()`.

use pptfe_core::BackendId;
use thiserror::Error;
use tokio::io::{AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt};

pub const VERSION: u8 = 0x01;
pub const MAX_PAYLOAD: usize = 16 * 1024 * 1024;
const PREFIX_LEN: usize = 4;
const META_LEN: usize = 3;

/// Error codes carried in [`MsgType::Error`] frames.
pub mod codes {
    pub const MALFORMED: u16 = 0x0001;
    pub const USER_PROOF_REJECTED: u16 = 0x0002;
    pub const INTERNAL: u16 = 0x00FF;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    IssueRequest = 0x01,
    IssueResponse = 0x02,
    Error = 0x7F,
}

impl MsgType {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(MsgType::IssueRequest),
            0x02 => Some(MsgType::IssueResponse),
            0x7F => Some(MsgType::Error),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("payload of {0} bytes exceeds the 16 MiB limit")]
    Oversize(usize),
    #[error("incomplete frame: {needed} more bytes needed")]
    Incomplete { needed: usize },
    #[error("declared length {0} is shorter than the frame header")]
    BadLength(u32),
    #[error("unsupported protocol version 0x{0:02x}")]
    Version(u8),
    #[error("unknown backend id 0x{0:02x}")]
    Backend(u8),
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("malformed error payload")]
    ErrorPayload,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub backend: BackendId,
    pub msg_type: MsgType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(backend: BackendId, msg_type: MsgType, payload: Vec<u8>) -> Self {
        Frame { backend, msg_type, payload }
    }

    pub fn error(backend: BackendId, code: u16, detail: &str) -> Self {
        let mut payload = code.to_be_bytes().to_vec();
        payload.extend_from_slice(detail.as_bytes());
        Frame::new(backend, MsgType::Error, payload)
    }

    pub fn encode(&self) -> Result<Vec<u8>, FrameError> {
        if self.payload.len() > MAX_PAYLOAD {
            return Err(FrameError::Oversize(self.payload.len()));
        }
        let len = (META_LEN + self.payload.len()) as u32;
        let mut out = Vec::with_capacity(PREFIX_LEN + len as usize);
        out.extend_from_slice(&len.to_be_bytes());
        out.push(VERSION);
        out.push(self.backend.as_byte());
        out.push(self.msg_type as u8);
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    /// Decodes one frame from the front of `buf` and reports how many bytes
    /// it used; anything after that belongs to the next frame.
    pub fn decode(buf: &[u8]) -> Result<(Frame, usize), FrameError> {
        if buf.len() < PREFIX_LEN {
            return Err(FrameError::Incomplete { needed: PREFIX_LEN - buf.len() });
        }
        let len = read_len(&buf[..PREFIX_LEN])?;
        let total = PREFIX_LEN + len;
        if buf.len() < total {
            return Err(FrameError::Incomplete { needed: total - buf.len() });
        }
        let frame = parse_body(&buf[PREFIX_LEN..total])?;
        Ok((frame, total))
    }

    /// `(code, detail)` of an error frame.
    pub fn error_parts(&self) -> Result<(u16, String), FrameError> {
        if self.msg_type != MsgType::Error || self.payload.len() < 2 {
            return Err(FrameError::ErrorPayload);
        }
        let code = u16::from_be_bytes([self.payload[0], self.payload[1]]);
        let detail = String::from_utf8(self.payload[2..].to_vec()).map_err(|_| FrameError::ErrorPayload)?;
        Ok((code, detail))
    }
}

fn read_len(prefix: &[u8]) -> Result<usize, FrameError> {
    let len = u32::from_be_bytes([prefix[0], prefix[1], prefix[2], prefix[3]]);
    if (len as usize) < META_LEN {
        return Err(FrameError::BadLength(len));
    }
    let payload = len as usize - META_LEN;
    if payload > MAX_PAYLOAD {
        return Err(FrameError::Oversize(payload));
    }
    Ok(len as usize)
}

fn parse_body(body: &[u8]) -> Result<Frame, FrameError> {
    if body[0] != VERSION {
        return Err(FrameError::Version(body[0]));
    }
    let backend = BackendId::from_byte(body[1]).ok_or(FrameError::Backend(body[1]))?;
    let msg_type = MsgType::from_byte(body[2]).ok_or(FrameError::UnknownType(body[2]))?;
    Ok(Frame { backend, msg_type, payload: body[META_LEN..].to_vec() })
}

/// Reads exactly one frame. Oversized frames are refused before their
/// payload is read.
pub async fn read_frame<R: AsyncRead + Unpin>(r: &mut R) -> Result<Frame, FrameError> {
    let mut prefix = [0u8; PREFIX_LEN];
    r.read_exact(&mut prefix).await?;
    let len = read_len(&prefix)?;
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).await?;
    parse_body(&body)
}

pub async fn write_frame<W: AsyncWrite + Unpin>(w: &mut W, frame: &Frame) -> Result<(), FrameError> {
    w.write_all(&frame.encode()?).await?;
    w.flush().await?;
    Ok(())
}
