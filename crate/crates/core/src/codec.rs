//! Canonical byte layout shared by proofs, protocol messages and files.
//!
//! Fields are concatenated in declaration order using each type's fixed-width
//! encoding. Variable-length lists carry a 4-byte big-endian element count.

use thiserror::Error;

use crate::backend::{GroupElement, ScalarField};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("input truncated: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("{0} trailing bytes after the last field")]
    Trailing(usize),
    #[error("non-canonical encoding: {0}")]
    NonCanonical(&'static str),
    #[error("invalid element: {0}")]
    Invalid(&'static str),
    #[error("list length {got} does not match the expected {expected}")]
    ListLength { expected: usize, got: usize },
    #[error("invalid UTF-8 in string field")]
    Utf8,
}

#[derive(Debug, Default, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar<S: ScalarField>(&mut self, s: &S) -> &mut Self {
        s.encode(&mut self.buf);
        self
    }

    pub fn element<G: GroupElement>(&mut self, g: &G) -> &mut Self {
        g.encode(&mut self.buf);
        self
    }

    pub fn count(&mut self, n: usize) -> &mut Self {
        let n = u32::try_from(n).expect("list longer than u32::MAX");
        self.buf.extend_from_slice(&n.to_be_bytes());
        self
    }

    pub fn scalars<S: ScalarField>(&mut self, list: &[S]) -> &mut Self {
        self.count(list.len());
        for s in list {
            self.scalar(s);
        }
        self
    }

    pub fn elements<G: GroupElement>(&mut self, list: &[G]) -> &mut Self {
        self.count(list.len());
        for g in list {
            self.element(g);
        }
        self
    }

    pub fn bytes(&mut self, raw: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(raw);
        self
    }

    pub fn string(&mut self, s: &str) -> &mut Self {
        self.count(s.len());
        self.bytes(s.as_bytes())
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(DecodeError::Truncated { needed: n - self.remaining() });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn scalar<S: ScalarField>(&mut self) -> Result<S, DecodeError> {
        S::decode(self.take(S::ENCODED_LEN)?)
    }

    pub fn element<G: GroupElement>(&mut self) -> Result<G, DecodeError> {
        G::decode(self.take(G::ENCODED_LEN)?)
    }

    pub fn count(&mut self) -> Result<usize, DecodeError> {
        let raw = self.take(4)?;
        Ok(u32::from_be_bytes([raw[0], raw[1], raw[2], raw[3]]) as usize)
    }

    /// Reads a count and checks it against the bytes left, so a hostile
    /// prefix cannot trigger a huge allocation.
    fn bounded_count(&mut self, item_len: usize) -> Result<usize, DecodeError> {
        let n = self.count()?;
        let need = n.saturating_mul(item_len);
        if need > self.remaining() {
            return Err(DecodeError::Truncated { needed: need - self.remaining() });
        }
        Ok(n)
    }

    pub fn scalars<S: ScalarField>(&mut self) -> Result<Vec<S>, DecodeError> {
        let n = self.bounded_count(S::ENCODED_LEN)?;
        (0..n).map(|_| self.scalar()).collect()
    }

    pub fn elements<G: GroupElement>(&mut self) -> Result<Vec<G>, DecodeError> {
        let n = self.bounded_count(G::ENCODED_LEN)?;
        (0..n).map(|_| self.element()).collect()
    }

    pub fn string(&mut self) -> Result<String, DecodeError> {
        let n = self.bounded_count(1)?;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| DecodeError::Utf8)
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(DecodeError::Trailing(n)),
        }
    }
}

/// Types with a canonical wire form.
pub trait Encode {
    fn encode_to(&self, w: &mut Writer);

    fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.encode_to(&mut w);
        w.finish()
    }
}

pub trait Decode: Sized {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError>;

    /// Decodes `bytes` exactly, rejecting trailing data.
    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let v = Self::decode_from(&mut r)?;
        r.finish()?;
        Ok(v)
    }
}

pub(crate) fn expect_len(expected: usize, got: usize) -> Result<(), DecodeError> {
    if expected == got {
        Ok(())
    } else {
        Err(DecodeError::ListLength { expected, got })
    }
}
