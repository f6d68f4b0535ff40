//! Error type shared by all modules.

use alloc::string::String;

/// Errors produced by construction and evaluation routines.
///
/// Every variant corresponds to a violated precondition or invariant; none of
/// them are recoverable mid-computation, so callers typically propagate them.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("qudit dimension d={0} is not supported (only d=2 is implemented)")]
    UnsupportedDimension(usize),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid state: {context}")]
    InvalidState { context: String },

    #[error("invalid effect: {context}")]
    InvalidEffect { context: String },

    #[error("invalid circuit: {context}")]
    InvalidCircuit { context: String },

    #[error("frame parameter out of bounds: {context}")]
    FrameParamOutOfBounds { context: String },

    #[error("frame pair fails duality reconstruction (error {error:e})")]
    DualityViolation { error: f64 },

    #[error("frame-inconsistent representation: imaginary residue {residue:e} above tolerance")]
    ImaginaryResidue { residue: f64 },

    #[error("size guard exceeded: {context}")]
    SizeGuard { context: String },

    #[error("unknown segment id {0}")]
    UnknownSegment(usize),

    #[error("merge refused: union support of {union} wires exceeds the spatial parameter n={n}")]
    MergeTooLarge { union: usize, n: usize },

    #[error("invalid configuration: {context}")]
    InvalidConfig { context: String },
}
