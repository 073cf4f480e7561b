//! Activations whose slope stays in `[0, 1]` wherever it exists.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DomainError, SpecError};

/// Smooth or piecewise activations other than identity/relu, all with
/// `0 <= σ'(x) <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClampedSlope {
    /// `ln(1 + e^x)`
    Softplus,
    /// `1 / (1 + e^-x)`, slope at most 1/4.
    Sigmoid,
    Tanh,
    /// `max(αx, x)` with `α ∈ [0, 1]`.
    LeakyRelu(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ActivationKind {
    Identity,
    Relu,
    ClampedSlope(ClampedSlope),
}

impl ActivationKind {
    pub fn leaky_relu(slope: f64) -> Result<Self, DomainError> {
        if (0.0..=1.0).contains(&slope) {
            Ok(ActivationKind::ClampedSlope(ClampedSlope::LeakyRelu(slope)))
        } else {
            Err(DomainError::InvalidActivation(format!(
                "leaky-relu:{slope}"
            )))
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            ActivationKind::Identity => x,
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::ClampedSlope(c) => match c {
                ClampedSlope::Softplus => {
                    // stable for large |x|
                    x.max(0.0) + (-x.abs()).exp().ln_1p()
                }
                ClampedSlope::Sigmoid => 1.0 / (1.0 + (-x).exp()),
                ClampedSlope::Tanh => x.tanh(),
                ClampedSlope::LeakyRelu(a) => {
                    if x >= 0.0 {
                        x
                    } else {
                        a * x
                    }
                }
            },
        }
    }

    /// Whether the activation has a slope discontinuity at 0.
    pub fn has_kink(self) -> bool {
        match self {
            ActivationKind::Relu => true,
            ActivationKind::ClampedSlope(ClampedSlope::LeakyRelu(a)) => a != 1.0,
            _ => false,
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationKind::Identity => f.write_str("identity"),
            ActivationKind::Relu => f.write_str("relu"),
            ActivationKind::ClampedSlope(ClampedSlope::Softplus) => f.write_str("softplus"),
            ActivationKind::ClampedSlope(ClampedSlope::Sigmoid) => f.write_str("sigmoid"),
            ActivationKind::ClampedSlope(ClampedSlope::Tanh) => f.write_str("tanh"),
            ActivationKind::ClampedSlope(ClampedSlope::LeakyRelu(a)) => {
                write!(f, "leaky-relu:{a}")
            }
        }
    }
}

impl FromStr for ActivationKind {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || SpecError::UnknownActivation(s.to_string());
        Ok(match s {
            "identity" => ActivationKind::Identity,
            "relu" => ActivationKind::Relu,
            "softplus" => ActivationKind::ClampedSlope(ClampedSlope::Softplus),
            "sigmoid" => ActivationKind::ClampedSlope(ClampedSlope::Sigmoid),
            "tanh" => ActivationKind::ClampedSlope(ClampedSlope::Tanh),
            other => {
                let slope = other
                    .strip_prefix("leaky-relu:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(unknown)?;
                ActivationKind::leaky_relu(slope).map_err(|_| unknown())?
            }
        })
    }
}

impl TryFrom<String> for ActivationKind {
    type Error = SpecError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ActivationKind> for String {
    fn from(a: ActivationKind) -> String {
        a.to_string()
    }
}
