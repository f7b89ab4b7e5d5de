//! Self-describing files for parameters, secrets, keys, ciphertexts and the
//! tracer's identity registry.
//!
//! Layout: `"PPTFEIP1" | kind (1) | backend (1) | l (4, BE) | body | SHA-256`
//! where the digest covers everything before it. The registry is not tied
//! to a dimension and stores `l = 0`.

use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::{Backend, BackendId, ScalarField};
use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::scheme::{Ciphertext, FunctionalKey, KeyContext, MasterSecretKey, PublicParams, TracerSecret};

pub const MAGIC: &[u8; 8] = b"PPTFEIP1";
const HEADER_LEN: usize = 8 + 1 + 1 + 4;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a key-material file (bad magic)")]
    BadMagic,
    #[error("file is truncated")]
    Truncated,
    #[error("integrity check failed: file is corrupt")]
    Corrupt,
    #[error("unknown artifact type 0x{0:02x}")]
    UnknownKind(u8),
    #[error("expected a {expected} file, found a {found} file")]
    ArtifactType { expected: ArtifactKind, found: ArtifactKind },
    #[error("unknown backend id 0x{0:02x}")]
    UnknownBackend(u8),
    #[error("file was written for the {found} backend, expected {expected}")]
    Backend { expected: BackendId, found: BackendId },
    #[error("header says dimension {header}, body has {body}")]
    Dimension { header: u32, body: u32 },
    #[error("malformed body: {0}")]
    Decode(#[from] DecodeError),
    #[error("registry conflict: {0}")]
    Conflict(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ArtifactKind {
    Params = 0x01,
    MasterSecret = 0x02,
    TracerSecret = 0x03,
    Key = 0x04,
    Ciphertext = 0x05,
    Registry = 0x06,
}

impl ArtifactKind {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x01 => ArtifactKind::Params,
            0x02 => ArtifactKind::MasterSecret,
            0x03 => ArtifactKind::TracerSecret,
            0x04 => ArtifactKind::Key,
            0x05 => ArtifactKind::Ciphertext,
            0x06 => ArtifactKind::Registry,
            _ => return None,
        })
    }
}

impl std::fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ArtifactKind::Params => "public-parameters",
            ArtifactKind::MasterSecret => "master-secret",
            ArtifactKind::TracerSecret => "tracer-secret",
            ArtifactKind::Key => "functional-key",
            ArtifactKind::Ciphertext => "ciphertext",
            ArtifactKind::Registry => "identity-registry",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub kind: ArtifactKind,
    pub backend: BackendId,
    pub dimension: u32,
}

/// Something that can be stored in a key-material file.
pub trait Artifact: Encode + Decode {
    type Backend: Backend;
    const KIND: ArtifactKind;

    fn dimension(&self) -> u32;
}

/// A functional key together with the context needed to use it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyFile<E: Backend> {
    pub key: FunctionalKey<E>,
    pub ctx: KeyContext<E>,
}

impl<E: Backend> Encode for KeyFile<E> {
    fn encode_to(&self, w: &mut Writer) {
        self.key.encode_to(w);
        self.ctx.encode_to(w);
    }
}

impl<E: Backend> Decode for KeyFile<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(KeyFile { key: FunctionalKey::decode_from(r)?, ctx: KeyContext::decode_from(r)? })
    }
}

fn dim(n: usize) -> u32 {
    u32::try_from(n).expect("dimension fits in u32")
}

impl<E: Backend> Artifact for PublicParams<E> {
    type Backend = E;
    const KIND: ArtifactKind = ArtifactKind::Params;
    fn dimension(&self) -> u32 {
        dim(PublicParams::dimension(self))
    }
}

impl<E: Backend> Artifact for MasterSecretKey<E> {
    type Backend = E;
    const KIND: ArtifactKind = ArtifactKind::MasterSecret;
    fn dimension(&self) -> u32 {
        dim(self.s.len())
    }
}

impl<E: Backend> Artifact for TracerSecret<E> {
    type Backend = E;
    const KIND: ArtifactKind = ArtifactKind::TracerSecret;
    fn dimension(&self) -> u32 {
        0
    }
}

impl<E: Backend> Artifact for KeyFile<E> {
    type Backend = E;
    const KIND: ArtifactKind = ArtifactKind::Key;
    fn dimension(&self) -> u32 {
        dim(self.ctx.y.len())
    }
}

impl<E: Backend> Artifact for Ciphertext<E> {
    type Backend = E;
    const KIND: ArtifactKind = ArtifactKind::Ciphertext;
    fn dimension(&self) -> u32 {
        dim(self.masked.len())
    }
}

impl<E: Backend> Artifact for IdentityRegistry<E> {
    type Backend = E;
    const KIND: ArtifactKind = ArtifactKind::Registry;
    fn dimension(&self) -> u32 {
        0
    }
}

/// Serializes an artifact with header and digest.
pub fn encode_artifact<A: Artifact>(artifact: &A) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    out.push(A::KIND as u8);
    out.push(<A::Backend as Backend>::ID.as_byte());
    out.extend_from_slice(&artifact.dimension().to_be_bytes());
    out.extend_from_slice(&artifact.to_bytes());
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

/// Reads and integrity-checks the header without decoding the body.
pub fn peek_header(bytes: &[u8]) -> Result<Header, StoreError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(StoreError::BadMagic);
    }
    if bytes.len() < HEADER_LEN + DIGEST_LEN {
        return Err(StoreError::Truncated);
    }
    let (content, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(content).as_slice() != digest {
        return Err(StoreError::Corrupt);
    }
    let kind = ArtifactKind::from_byte(bytes[8]).ok_or(StoreError::UnknownKind(bytes[8]))?;
    let backend = BackendId::from_byte(bytes[9]).ok_or(StoreError::UnknownBackend(bytes[9]))?;
    let dimension = u32::from_be_bytes([bytes[10], bytes[11], bytes[12], bytes[13]]);
    Ok(Header { kind, backend, dimension })
}

pub fn decode_artifact<A: Artifact>(bytes: &[u8]) -> Result<A, StoreError> {
    let header = peek_header(bytes)?;
    if header.kind != A::KIND {
        return Err(StoreError::ArtifactType { expected: A::KIND, found: header.kind });
    }
    let expected = <A::Backend as Backend>::ID;
    if header.backend != expected {
        return Err(StoreError::Backend { expected, found: header.backend });
    }
    let body = &bytes[HEADER_LEN..bytes.len() - DIGEST_LEN];
    let artifact = A::from_bytes(body)?;
    if artifact.dimension() != header.dimension {
        return Err(StoreError::Dimension { header: header.dimension, body: artifact.dimension() });
    }
    Ok(artifact)
}

/// Writes via a temporary sibling and a rename, so readers never see a
/// half-written file.
pub fn write_artifact<A: Artifact>(path: impl AsRef<Path>, artifact: &A) -> Result<(), StoreError> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, encode_artifact(artifact))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_artifact<A: Artifact>(path: impl AsRef<Path>) -> Result<A, StoreError> {
    decode_artifact(&fs::read(path)?)
}

pub fn read_header(path: impl AsRef<Path>) -> Result<Header, StoreError> {
    peek_header(&fs::read(path)?)
}

/// The tracer's labelled list of known identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityRegistry<E: Backend> {
    entries: Vec<(String, E::Scalar)>,
}

impl<E: Backend> Default for IdentityRegistry<E> {
    fn default() -> Self {
        IdentityRegistry { entries: Vec::new() }
    }
}

impl<E: Backend> IdentityRegistry<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn register_identity(&mut self, label: &str, theta: E::Scalar) -> Result<(), StoreError> {
        if theta.is_zero() {
            return Err(StoreError::Conflict("identity must be nonzero".into()));
        }
        if self.entries.iter().any(|(l, _)| l == label) {
            return Err(StoreError::Conflict(format!("label `{label}` already registered")));
        }
        if let Some((other, _)) = self.entries.iter().find(|(_, t)| *t == theta) {
            return Err(StoreError::Conflict(format!("identity already registered as `{other}`")));
        }
        self.entries.push((label.to_owned(), theta));
        Ok(())
    }

    pub fn resolve(&self, theta: &E::Scalar) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, t)| t == theta)
            .map(|(l, _)| l.as_str())
    }

    /// Identities in registration order.
    pub fn candidates(&self) -> Vec<E::Scalar> {
        self.entries.iter().map(|(_, t)| *t).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &E::Scalar)> {
        self.entries.iter().map(|(l, t)| (l.as_str(), t))
    }
}

impl<E: Backend> Encode for IdentityRegistry<E> {
    fn encode_to(&self, w: &mut Writer) {
        w.count(self.entries.len());
        for (label, theta) in &self.entries {
            w.string(label).scalar(theta);
        }
    }
}

impl<E: Backend> Decode for IdentityRegistry<E> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let n = r.count()?;
        let mut reg = IdentityRegistry::new();
        for _ in 0..n {
            let label = r.string()?;
            let theta = r.scalar()?;
            reg.register_identity(&label, theta)
                .map_err(|_| DecodeError::Invalid("duplicate or zero registry entry"))?;
        }
        Ok(reg)
    }
}
