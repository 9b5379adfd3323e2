//! Analog error-correction codes built from piecewise-linear chaotic maps.
//!
//! The tent map and the folded baker's map expand small seed differences
//! exponentially, which is exactly the distance expansion a channel code
//! needs: treat the source block as the seed, transmit later orbit states as
//! parities. Turbo-style variants concatenate two maps so that the weakly
//! protected branch decisions of one are covered by the other.
//!
//! The crate provides:
//!
//! * [`map`] — tent / baker map kernels, orbits and symbolic coding;
//! * [`code`] — the four encoders with puncturing and exact rates;
//! * [`decoder`] — exact ML decoding by affine-segment enumeration, a
//!   brute-force grid oracle, and a genie-aided bound decoder;
//! * [`channel`] — AWGN, SNR calibration and reproducible per-trial seeding;
//! * [`digital`] — the quantize + convolutional code + PAM baseline at 1:6
//!   bandwidth expansion;
//! * [`sweep`] — deterministic Monte Carlo MSE-vs-SNR sweeps with CSV output;
//! * [`config`] — `key = value` config files for the CLI.

pub mod channel;
pub mod code;
pub mod config;
pub mod decoder;
pub mod digital;
pub mod error;
pub mod map;
pub mod sweep;

pub use channel::ChannelObservation;
pub use code::{Codeword, CodeSpec};
pub use decoder::{AffineSegment, DecodeResult, MlDecoder};
pub use error::{Error, Result};
pub use map::{PlanePoint, Sign, SymbolicCoding, TentParam};
