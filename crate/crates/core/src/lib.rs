//! Traceable inner-product functional encryption with privacy-preserving
//! key issuance.

pub mod backend;
pub mod codec;
pub mod dlog;
pub mod error;
pub mod issuance;
pub mod scheme;
pub mod sigma;
pub mod store;

pub use backend::{Backend, BackendId, Curve, GroupElement, ScalarField, Toy};
pub use codec::{Decode, DecodeError, Encode};
pub use error::{Error, IssueStage, Result};
pub use issuance::{kgc_respond, user_finalize, user_round1, Msg1, Msg2, UserRound1State};
pub use scheme::{
    check_key, decrypt, encrypt, keygen, setup, trace, verify_key, Ciphertext, Decryptor,
    FunctionalKey, KeyCheck, KeyContext, MasterSecretKey, PublicParams, TracerSecret,
};
pub use store::{IdentityRegistry, KeyFile, StoreError};
