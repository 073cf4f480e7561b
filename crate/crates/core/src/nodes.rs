//! The five node kernels: sum-product, max-sum, signed max-sum, max*-sum and
//! LNS. Each is a pure function of inputs, weights, bias, signs and
//! activation.

use std::fmt;
use std::str::FromStr;

use crate::activation::ActivationKind;
use crate::error::{DomainError, SpecError};
use crate::signed_log::{self, lns_add, lns_mul, max_star_n, SignedLogValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    SumProduct(ActivationKind),
    /// Morphological perceptron; the max is the only non-linearity.
    MaxSum,
    SignedMaxSum,
    MaxStarSum(ActivationKind),
    Lns(ActivationKind),
}

impl NodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::SumProduct(_) => "sum-product",
            NodeKind::MaxSum => "max-sum",
            NodeKind::SignedMaxSum => "signed-max-sum",
            NodeKind::MaxStarSum(_) => "max-star-sum",
            NodeKind::Lns(_) => "lns",
        }
    }

    pub fn activation(&self) -> Option<ActivationKind> {
        match *self {
            NodeKind::SumProduct(a) | NodeKind::MaxStarSum(a) | NodeKind::Lns(a) => Some(a),
            NodeKind::MaxSum | NodeKind::SignedMaxSum => None,
        }
    }

    /// Builds a kind from its CLI/JSON name. Max kinds reject any activation
    /// other than none/identity; the others default to relu.
    pub fn from_parts(name: &str, activation: Option<ActivationKind>) -> Result<Self, SpecError> {
        let act = activation.unwrap_or(ActivationKind::Relu);
        let no_act = |kind: NodeKind| match activation {
            None | Some(ActivationKind::Identity) => Ok(kind),
            Some(a) => Err(SpecError::UnexpectedActivation {
                kind: name.to_string(),
                activation: a.to_string(),
            }),
        };
        match name {
            "sum-product" => Ok(NodeKind::SumProduct(act)),
            "max-sum" => no_act(NodeKind::MaxSum),
            "signed-max-sum" => no_act(NodeKind::SignedMaxSum),
            "max-star-sum" => Ok(NodeKind::MaxStarSum(act)),
            "lns" => Ok(NodeKind::Lns(act)),
            other => Err(SpecError::UnknownNodeKind(other.to_string())),
        }
    }

    pub const NAMES: [&'static str; 5] = [
        "sum-product",
        "max-sum",
        "signed-max-sum",
        "max-star-sum",
        "lns",
    ];
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.activation() {
            Some(a) => write!(f, "{}({a})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for NodeKind {
    type Err = SpecError;

    /// Parses `max-sum`, `sum-product`, or `sum-product(tanh)` style names.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('(') {
            Some((name, rest)) => {
                let act = rest
                    .strip_suffix(')')
                    .ok_or_else(|| SpecError::UnknownNodeKind(s.to_string()))?
                    .parse()?;
                NodeKind::from_parts(name, Some(act))
            }
            None => NodeKind::from_parts(s, None),
        }
    }
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), DomainError> {
    if got != expected {
        return Err(DomainError::LengthMismatch {
            what,
            got,
            expected,
        });
    }
    Ok(())
}

fn check_inputs(x_len: usize, w_len: usize) -> Result<(), DomainError> {
    if x_len == 0 {
        return Err(DomainError::Empty);
    }
    check_len("weights", w_len, x_len)
}

/// `σ(b + Σ w_i x_i)`
pub fn node_sum_product(
    x: &[f64],
    w: &[f64],
    b: f64,
    act: ActivationKind,
) -> Result<f64, DomainError> {
    check_inputs(x.len(), w.len())?;
    let s = x.iter().zip(w).fold(b, |acc, (xi, wi)| acc + wi * xi);
    Ok(act.apply(s))
}

/// `b ∨ ⋁_i (w_i + x_i)`
pub fn node_max_sum(x: &[f64], w: &[f64], b: f64) -> Result<f64, DomainError> {
    check_inputs(x.len(), w.len())?;
    if !b.is_finite() {
        return Err(DomainError::NonFinite(b));
    }
    Ok(x.iter().zip(w).fold(b, |acc, (xi, wi)| acc.max(wi + xi)))
}

/// Validates a sign vector entry; signs are data, not learned.
pub fn check_sign(a: f64) -> Result<(), DomainError> {
    if a == 1.0 || a == -1.0 {
        Ok(())
    } else {
        Err(DomainError::InvalidSign(a))
    }
}

/// `b ∨ ⋁_i a_i (w_i + x_i)` with `a_i ∈ {-1, +1}`.
pub fn node_signed_max_sum(x: &[f64], w: &[f64], a: &[f64], b: f64) -> Result<f64, DomainError> {
    check_inputs(x.len(), w.len())?;
    check_len("signs", a.len(), x.len())?;
    if !b.is_finite() {
        return Err(DomainError::NonFinite(b));
    }
    let mut acc = b;
    for ((xi, wi), &ai) in x.iter().zip(w).zip(a) {
        check_sign(ai)?;
        // a = +1 must reproduce node_max_sum bit for bit, so no multiply
        let t = if ai > 0.0 { wi + xi } else { -(wi + xi) };
        acc = acc.max(t);
    }
    Ok(acc)
}

/// `σ(max*(b, max*_i (x_i + w_i)))`, i.e. `σ(ln(e^b + Σ_i e^{x_i + w_i}))`.
pub fn node_max_star_sum(
    x: &[f64],
    w: &[f64],
    b: f64,
    act: ActivationKind,
) -> Result<f64, DomainError> {
    check_inputs(x.len(), w.len())?;
    let mut args = Vec::with_capacity(x.len() + 1);
    args.push(b);
    args.extend(x.iter().zip(w).map(|(xi, wi)| xi + wi));
    Ok(act.apply(max_star_n(&args)?))
}

/// LNS image of `σ(b + Σ w_i x_i)`. The activation is applied in the linear
/// domain.
pub fn node_lns(
    x: &[SignedLogValue],
    w: &[SignedLogValue],
    b: SignedLogValue,
    act: ActivationKind,
) -> Result<SignedLogValue, DomainError> {
    node_lns_with(x, w, b, act, lns_mul)
}

/// [`node_lns`] with a caller-supplied multiplier.
pub fn node_lns_with(
    x: &[SignedLogValue],
    w: &[SignedLogValue],
    b: SignedLogValue,
    act: ActivationKind,
    mul: fn(SignedLogValue, SignedLogValue) -> SignedLogValue,
) -> Result<SignedLogValue, DomainError> {
    check_inputs(x.len(), w.len())?;
    let pre = x
        .iter()
        .zip(w)
        .fold(b, |acc, (&xi, &wi)| lns_add(acc, mul(xi, wi)));
    if act == ActivationKind::Identity {
        return Ok(pre);
    }
    SignedLogValue::from_linear(act.apply(pre.to_linear()))
}

/// Convenience: the max* of the pairwise log sums, `max*_i (ln a_i + ln b_i)`.
pub fn log_domain_dot(log_a: &[f64], log_b: &[f64]) -> Result<f64, DomainError> {
    check_inputs(log_a.len(), log_b.len())?;
    let sums: Vec<f64> = log_a.iter().zip(log_b).map(|(a, b)| a + b).collect();
    signed_log::max_star_n(&sums)
}
