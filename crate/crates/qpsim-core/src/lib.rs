//! Quasi-probability estimation of qudit circuit outcome probabilities.
//!
//! Circuit components (states, gates, measurement effects) are represented as
//! quasi-probability distributions over discrete phase space under a choice of
//! operator frame per wire segment. The total negativity of the representation
//! controls the Monte Carlo sample count needed for a target accuracy, so the
//! crate provides two pre-processing passes that reduce it:
//!
//! * [`merging`] — greedy gate merging up to a spatial truncation `n`,
//! * [`frameopt`] — cyclic block-local frame optimisation with a temporal
//!   truncation `ell`, driven by a gradient-free basin-hopping search.
//!
//! [`sampler`] then estimates the Born probability with a signed,
//! negativity-weighted trajectory sampler, and [`oracle`] provides exact
//! brute-force probabilities for verification.
//!
//! The crate is `no_std`-compatible (`alloc` required); disable default
//! features to drop `std` and the `rayon`-based parallel paths.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod circuit;
pub mod error;
pub mod frameopt;
pub mod frames;
pub mod merging;
pub mod numerics;
pub mod oracle;
pub mod quasiprob;
pub mod sampler;

pub use circuit::{Circuit, Gate};
pub use error::Error;
pub use frames::{FrameKind, FramePair};
pub use merging::MergeConfig;
pub use numerics::{CMatrix, WireSupport};
pub use quasiprob::{FrameAssignment, QuasiDist, SegmentTopology, TransitionTensor};
pub use sampler::{CompiledCircuit, EstimateReport};

/// Convenient result alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
