use thiserror::Error;

/// Argument-level failures of the arithmetic and node kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("empty sequence")]
    Empty,
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("sign entry {0} is not -1 or +1")]
    InvalidSign(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("activation {0} does not keep its slope in [0, 1]")]
    InvalidActivation(String),
}

/// Structural problems in a network description.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("unknown node kind `{0}` (expected one of sum-product, max-sum, signed-max-sum, max-star-sum, lns)")]
    UnknownNodeKind(String),
    #[error("unknown activation `{0}` (expected identity, relu, softplus, sigmoid, tanh or leaky-relu:<slope>)")]
    UnknownActivation(String),
    #[error("node kind {kind} takes no activation, got `{activation}`")]
    UnexpectedActivation { kind: String, activation: String },
    #[error("network has no layers")]
    NoLayers,
    #[error("layer {layer}: {reason}")]
    Layer { layer: usize, reason: String },
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl SpecError {
    pub(crate) fn layer(layer: usize, reason: impl Into<String>) -> Self {
        SpecError::Layer {
            layer,
            reason: reason.into(),
        }
    }
}
