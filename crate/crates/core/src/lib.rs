//! Pliable index codes for g-group complete-{s} broadcast problems.
//!
//! The crate builds the multi-round MDS/uncoded achievability code over
//! GF(2^w), simulates its broadcast decoding, and checks converse bounds by
//! computing exact maximum acyclic induced subgraphs over every decoding
//! choice of small instances.

pub mod bounds;
pub mod cli;
pub mod digraph;
pub mod error;
pub mod galois;
pub mod instance;
pub mod mais;
pub mod mds;
pub mod scheme;

pub use error::{Error, Result};
pub use instance::{DecodingChoice, Instance, ReceiverId};
