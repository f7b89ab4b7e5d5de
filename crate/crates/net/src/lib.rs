//! TCP transport for blind key issuance: framing, the KGC server and the
//! requesting client.
//!
//! Frames carry protocol messages in the clear. The messages themselves are
//! authenticated by their proofs and the identity is perfectly blinded, but
//! deployments should still run this behind an authenticated, encrypted
//! channel.

pub mod client;
pub mod frame;
pub mod server;

pub use client::{request_key, ClientError};
pub use frame::{codes, Frame, FrameError, MsgType};
pub use server::{serve, AbortReason, ServerConfig, ServerHandle, SessionOutcome, SessionRecord};
