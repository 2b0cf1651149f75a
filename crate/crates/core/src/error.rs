//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by motion I/O, graph construction, losses, metrics,
/// the network, and the ablation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A motion file or in-memory sequence violates an invariant. `field`
    /// names the offending piece of data.
    #[error("invalid motion data in `{field}`: {reason}")]
    InvalidMotion { field: String, reason: String },

    /// Two sequences that must share dimensions do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A temporal operation was applied to a sequence with too few frames.
    #[error("sequence too short for {op}: needs at least {needed} frames, got {got}")]
    SequenceTooShort {
        op: &'static str,
        needed: usize,
        got: usize,
    },

    /// All requested motion-loss scales are >= the sequence length.
    #[error("no usable motion-loss scale: all scales >= sequence length {frames}")]
    NoUsableScale { frames: usize },

    /// Input channel count does not match the network specification.
    #[error("channel mismatch: network expects {expected} channels, input provides {got}")]
    ChannelMismatch { expected: usize, got: usize },

    /// An invalid network specification (channel chaining, kernel parity, ...).
    #[error("invalid network spec: {0}")]
    InvalidNetworkSpec(String),

    /// A forward cache was reused after the parameters changed.
    #[error("stale forward cache: parameters were updated after the forward pass")]
    StaleCache,

    /// Training produced a non-finite loss.
    #[error("non-finite loss at optimizer step {step}; aborting update")]
    NonFiniteLoss { step: u64 },

    /// A malformed checkpoint file.
    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),

    /// An invalid synthetic-corpus or ablation configuration.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Reports passed to a comparison do not share the same column keys.
    #[error("report key mismatch: {0}")]
    KeyMismatch(String),

    /// Projection hit a point at or behind the camera plane.
    #[error("perspective projection requires positive depth: frame {frame}, joint {joint} has z = {depth}")]
    NonPositiveDepth {
        frame: usize,
        joint: usize,
        depth: f64,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
