//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, CoreError>;

/// Structured failure modes of the core algorithms.
///
/// Variants carry the values a caller needs to diagnose the problem; they are
/// not meant to be matched exhaustively by downstream code.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A dimension did not match what the operation required.
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// A weight vector or prediction matrix was paired with the wrong spec
    /// or evaluation set.
    DigestMismatch { context: &'static str },
    /// A forward/backward pass produced a non-finite value; `layer` is the
    /// first layer (0-based) at which it appeared.
    NonFinite { layer: usize },
    /// Training loss became non-finite at the given optimizer step.
    Diverged { step: usize },
    /// A precondition on an argument was violated.
    Invalid { context: String },
    /// Checkpoint or IDX payload did not start with the expected magic.
    BadMagic { expected: u32, got: u32 },
    /// Checkpoint version is not supported by this reader.
    BadVersion { got: u16 },
    /// Byte payload ended before the declared content.
    Truncated { needed: usize, got: usize },
    /// Stored header digest does not match the recomputed one.
    BadHeaderDigest,
    /// IDX image and label files declare different example counts.
    CountMismatch { images: usize, labels: usize },
    /// A training-run member of an ensemble failed.
    Member {
        index: usize,
        source: alloc::boxed::Box<CoreError>,
    },
}

impl CoreError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CoreError::Invalid {
            context: msg.into(),
        }
    }
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Shape {
                context,
                expected,
                got,
            } => write!(f, "shape mismatch in {context}: expected {expected}, got {got}"),
            CoreError::DigestMismatch { context } => {
                write!(f, "digest mismatch: {context}")
            }
            CoreError::NonFinite { layer } => {
                write!(f, "non-finite value first appeared in layer {layer}")
            }
            CoreError::Diverged { step } => {
                write!(f, "training loss became non-finite at step {step}")
            }
            CoreError::Invalid { context } => write!(f, "invalid argument: {context}"),
            CoreError::BadMagic { expected, got } => {
                write!(f, "bad magic: expected {expected:#010x}, got {got:#010x}")
            }
            CoreError::BadVersion { got } => write!(f, "unsupported format version {got}"),
            CoreError::Truncated { needed, got } => {
                write!(f, "payload truncated: needed {needed} bytes, got {got}")
            }
            CoreError::BadHeaderDigest => write!(f, "header digest check failed"),
            CoreError::CountMismatch { images, labels } => {
                write!(f, "IDX count mismatch: {images} images vs {labels} labels")
            }
            CoreError::Member { index, source } => {
                write!(f, "ensemble member {index} failed: {source}")
            }
        }
    }
}

impl core::error::Error for CoreError {}
