//! Two-party privacy-preserving record screening.
//!
//! Two data holders learn how many of the requester's records link to the
//! candidate's database, and nothing else. The pipeline is built from
//! boolean/arithmetic secret sharing ([`shares`]), oblivious transfer
//! ([`ot`]), per-attribute circuit-PSI ([`cpsi`]), oblivious feature
//! alignment over switching networks ([`ofa`], [`permnet`]) and secret-shared
//! scoring ([`score`]). [`engine`] ties them together.

pub mod binning;
pub mod bits;
pub mod cpsi;
pub mod engine;
pub mod error;
pub mod features;
pub mod ofa;
pub mod ot;
pub mod permnet;
pub mod score;
pub mod session;
pub mod shares;
pub mod transport;

pub use error::{Error, Result};
