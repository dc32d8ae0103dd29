//! A laboratory for binary codes against deletion channels.
//!
//! The crate provides the bit-level primitives ([`words`]), a concatenated
//! run-count code and its deletion-pattern analysis ([`construction`]), the
//! signature-driven matching procedure ([`matching`]), code assembly and
//! average-case measurement against oblivious patterns ([`oblivious`]),
//! causal online adversaries ([`online`]) and brute-force or closed-form
//! checks of the supporting combinatorial facts ([`oracles`]).

pub mod construction;
pub mod error;
pub mod io;
pub mod matching;
pub mod oblivious;
pub mod online;
pub mod oracles;
pub mod seed;
pub mod words;

pub use error::{Error, Result};
pub use words::{DeletionPattern, Word};
