//! Scalar-input, scalar-output layered networks for every [`NodeKind`],
//! their JSON form, and finite-difference derivative probes.
//!
//! Hidden layers apply the network activation; the output layer applies
//! none, for every kind. For max*-sum nets this matches the derivative
//! bound's setting, and the other kinds follow the same convention.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::error::{DomainError, SpecError};
use crate::nodes::{self, NodeKind};
use crate::signed_log::{lns_mul, max_star_n, SignedLogValue};

/// Range of uniformly drawn weights and biases in [`random_network`].
pub const RANDOM_WEIGHT_RANGE: f64 = 2.0;

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    /// `out × in`
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<Vec<f64>>>,
}

impl LayerSpec {
    pub fn width(&self) -> usize {
        self.biases.len()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }
}

/// A validated network. Construct through [`NetworkSpec::new`] or
/// [`NetworkSpec::from_json`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    node_kind: NodeKind,
    layers: Vec<LayerSpec>,
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    node_kind: String,
    activation: Option<String>,
    layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(node_kind: NodeKind, layers: Vec<LayerSpec>) -> Result<Self, SpecError> {
        let net = NetworkSpec { node_kind, layers };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<(), SpecError> {
        if self.layers.is_empty() {
            return Err(SpecError::NoLayers);
        }
        let signed = self.node_kind == NodeKind::SignedMaxSum;
        let mut in_dim = 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let width = layer.width();
            if width == 0 {
                return Err(SpecError::layer(li, "width must be positive"));
            }
            if layer.weights.len() != width {
                return Err(SpecError::layer(
                    li,
                    format!("{} weight rows for {width} biases", layer.weights.len()),
                ));
            }
            for (r, row) in layer.weights.iter().enumerate() {
                if row.len() != in_dim {
                    return Err(SpecError::layer(
                        li,
                        format!(
                            "weight row {r} has {} entries, expected {in_dim}",
                            row.len()
                        ),
                    ));
                }
            }
            let finite = layer
                .weights
                .iter()
                .flatten()
                .chain(&layer.biases)
                .all(|v| v.is_finite());
            if !finite {
                return Err(SpecError::layer(li, "non-finite weight or bias"));
            }
            match (&layer.signs, signed) {
                (None, true) => {
                    return Err(SpecError::layer(li, "signed-max-sum layer needs signs"))
                }
                (Some(_), false) => {
                    return Err(SpecError::layer(
                        li,
                        format!("signs given for {} layer", self.node_kind.name()),
                    ))
                }
                (Some(signs), true) => {
                    let shape_ok = signs.len() == width && signs.iter().all(|r| r.len() == in_dim);
                    if !shape_ok {
                        return Err(SpecError::layer(
                            li,
                            "sign matrix shape differs from weights",
                        ));
                    }
                    if let Some(bad) = signs
                        .iter()
                        .flatten()
                        .find(|&&a| nodes::check_sign(a).is_err())
                    {
                        return Err(SpecError::layer(
                            li,
                            format!("sign entry {bad} is not -1 or +1"),
                        ));
                    }
                }
                (None, false) => {}
            }
            in_dim = width;
        }
        if in_dim != 1 {
            return Err(SpecError::layer(
                self.layers.len() - 1,
                format!("output layer has width {in_dim}, expected 1"),
            ));
        }
        Ok(())
    }

    pub fn node_kind(&self) -> NodeKind {
        self.node_kind
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.depth()]
            .iter()
            .map(LayerSpec::width)
            .collect()
    }

    /// Largest absolute weight; the scale used by second-derivative checks.
    pub fn weight_scale(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().flatten())
            .fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// Weights then biases, layer by layer. Signs are not parameters.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend(layer.weights.iter().flatten());
            out.extend(&layer.biases);
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.width() * (l.in_dim() + 1))
            .sum()
    }

    /// Same topology and signs with new parameters, in [`Self::params`] order.
    pub fn with_params(&self, params: &[f64]) -> NetworkSpec {
        assert_eq!(params.len(), self.param_count(), "parameter count");
        let mut next = self.clone();
        let mut it = params.iter().copied();
        for layer in &mut next.layers {
            for w in layer.weights.iter_mut().flatten() {
                *w = it.next().unwrap();
            }
            for b in &mut layer.biases {
                *b = it.next().unwrap();
            }
        }
        next
    }

    /// The same parameters under another node kind. Signs are dropped or
    /// filled with `+1` as the target kind requires.
    pub fn with_kind(&self, kind: NodeKind) -> NetworkSpec {
        let mut next = self.clone();
        next.node_kind = kind;
        for layer in &mut next.layers {
            if kind == NodeKind::SignedMaxSum {
                if layer.signs.is_none() {
                    layer.signs = Some(vec![vec![1.0; layer.in_dim()]; layer.width()]);
                }
            } else {
                layer.signs = None;
            }
        }
        next
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_doc()).expect("network serializes")
    }

    fn to_json_doc(&self) -> NetworkJson {
        NetworkJson {
            node_kind: self.node_kind.name().to_string(),
            activation: self.node_kind.activation().map(|a| a.to_string()),
            layers: self.layers.clone(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self, SpecError> {
        let doc: NetworkJson =
            serde_json::from_str(s).map_err(|e| SpecError::Json(e.to_string()))?;
        let activation = doc
            .activation
            .as_deref()
            .map(str::parse::<ActivationKind>)
            .transpose()?;
        let kind = NodeKind::from_parts(&doc.node_kind, activation)?;
        NetworkSpec::new(kind, doc.layers)
    }
}

impl Serialize for NetworkSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json_doc().serialize(s)
    }
}

/// Tie and kink information gathered during one evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KinkTrace {
    /// Smallest distance to a non-differentiable configuration: the gap
    /// between the two largest max arguments, or `|pre-activation|` for
    /// kinked activations.
    pub min_gap: f64,
    /// Active branch of every max and kinked activation.
    pub pattern: Vec<u32>,
}

impl KinkTrace {
    fn new() -> Self {
        KinkTrace {
            min_gap: f64::INFINITY,
            pattern: Vec::new(),
        }
    }

    fn record_max(&mut self, args: &[f64]) {
        let mut best = 0;
        for (i, &v) in args.iter().enumerate() {
            if v > args[best] {
                best = i;
            }
        }
        let second = args
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        self.min_gap = self.min_gap.min(args[best] - second);
        self.pattern.push(best as u32);
    }

    fn record_activation(&mut self, act: ActivationKind, pre: f64) {
        if act.has_kink() {
            self.min_gap = self.min_gap.min(pre.abs());
            self.pattern.push(u32::from(pre >= 0.0));
        }
    }
}

/// Evaluates a network, optionally with a substituted LNS multiplier.
#[derive(Clone)]
pub struct Evaluator<'a> {
    net: &'a NetworkSpec,
    lns_weights: Vec<(Vec<Vec<SignedLogValue>>, Vec<SignedLogValue>)>,
    lns_mul: fn(SignedLogValue, SignedLogValue) -> SignedLogValue,
}

fn to_lns(v: f64) -> SignedLogValue {
    SignedLogValue::from_linear(v).expect("validated finite")
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a NetworkSpec) -> Self {
        let lns_weights = if matches!(net.node_kind, NodeKind::Lns(_)) {
            net.layers
                .iter()
                .map(|l| {
                    let w = l
                        .weights
                        .iter()
                        .map(|row| row.iter().map(|&v| to_lns(v)).collect())
                        .collect();
                    let b = l.biases.iter().map(|&v| to_lns(v)).collect();
                    (w, b)
                })
                .collect()
        } else {
            Vec::new()
        };
        Evaluator {
            net,
            lns_weights,
            lns_mul,
        }
    }

    pub fn with_lns_mul(
        mut self,
        mul: fn(SignedLogValue, SignedLogValue) -> SignedLogValue,
    ) -> Self {
        self.lns_mul = mul;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.run(x, None)
    }

    pub fn eval_traced(&self, x: f64) -> (f64, KinkTrace) {
        let mut trace = KinkTrace::new();
        let y = self.run(x, Some(&mut trace));
        (y, trace)
    }

    fn run(&self, x: f64, mut trace: Option<&mut KinkTrace>) -> f64 {
        let net = self.net;
        if let NodeKind::Lns(act) = net.node_kind {
            return self.run_lns(x, act, trace);
        }
        let last = net.layers.len() - 1;
        let mut input = vec![x];
        let mut args = Vec::new();
        for (li, layer) in net.layers.iter().enumerate() {
            let act = if li == last {
                ActivationKind::Identity
            } else {
                net.node_kind
                    .activation()
                    .unwrap_or(ActivationKind::Identity)
            };
            let mut out = Vec::with_capacity(layer.width());
            for (u, row) in layer.weights.iter().enumerate() {
                let b = layer.biases[u];
                let y = match net.node_kind {
                    NodeKind::SumProduct(_) => {
                        let pre = input.iter().zip(row).fold(b, |acc, (xi, wi)| acc + wi * xi);
                        if let Some(t) = trace.as_deref_mut() {
                            t.record_activation(act, pre);
                        }
                        act.apply(pre)
                    }
                    NodeKind::MaxSum | NodeKind::SignedMaxSum => {
                        args.clear();
                        args.push(b);
                        match &layer.signs {
                            Some(signs) => {
                                args.extend(input.iter().zip(row).zip(&signs[u]).map(
                                    |((xi, wi), &a)| if a > 0.0 { wi + xi } else { -(wi + xi) },
                                ))
                            }
                            None => args.extend(input.iter().zip(row).map(|(xi, wi)| wi + xi)),
                        }
                        if let Some(t) = trace.as_deref_mut() {
                            t.record_max(&args);
                        }
                        args.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    }
                    NodeKind::MaxStarSum(_) => {
                        args.clear();
                        args.push(b);
                        args.extend(input.iter().zip(row).map(|(xi, wi)| xi + wi));
                        let pre = max_star_n(&args).expect("non-empty");
                        if let Some(t) = trace.as_deref_mut() {
                            t.record_activation(act, pre);
                        }
                        act.apply(pre)
                    }
                    NodeKind::Lns(_) => unreachable!(),
                };
                out.push(y);
            }
            input = out;
        }
        input[0]
    }

    fn run_lns(&self, x: f64, act: ActivationKind, mut trace: Option<&mut KinkTrace>) -> f64 {
        let last = self.lns_weights.len() - 1;
        let mut input = vec![to_lns(x)];
        for (li, (weights, biases)) in self.lns_weights.iter().enumerate() {
            let act = if li == last {
                ActivationKind::Identity
            } else {
                act
            };
            let mut out = Vec::with_capacity(biases.len());
            for (row, &b) in weights.iter().zip(biases) {
                let pre =
                    nodes::node_lns_with(&input, row, b, ActivationKind::Identity, self.lns_mul)
                        .expect("validated shapes");
                if let Some(t) = trace.as_deref_mut() {
                    t.record_activation(act, pre.to_linear());
                }
                let y = if act == ActivationKind::Identity {
                    pre
                } else {
                    to_lns(act.apply(pre.to_linear()))
                };
                out.push(y);
            }
            input = out;
        }
        input[0].to_linear()
    }
}

/// `f_d(x)` for a validated network.
pub fn evaluate(net: &NetworkSpec, x: f64) -> f64 {
    Evaluator::new(net).eval(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffOrder {
    First,
    Second,
}

impl DiffOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            DiffOrder::First => 1,
            DiffOrder::Second => 2,
        }
    }
}

impl TryFrom<u8> for DiffOrder {
    type Error = DomainError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(DiffOrder::First),
            2 => Ok(DiffOrder::Second),
            other => Err(DomainError::InvalidArgument(format!(
                "derivative order {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeProbe {
    pub x: f64,
    pub h: f64,
    pub order: u8,
    pub value: f64,
    pub near_kink: bool,
}

/// Central-difference probe. `near_kink` is set when any max tie or
/// activation kink lies within `10·h` of the evaluated points, or when the
/// active branches differ between `x - h`, `x` and `x + h`.
pub fn finite_diff(
    net: &NetworkSpec,
    x: f64,
    h: f64,
    order: DiffOrder,
) -> Result<DerivativeProbe, DomainError> {
    probe_with(&Evaluator::new(net), x, h, order)
}

pub fn probe_with(
    ev: &Evaluator<'_>,
    x: f64,
    h: f64,
    order: DiffOrder,
) -> Result<DerivativeProbe, DomainError> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(DomainError::InvalidArgument(format!(
            "step {h} outside [1e-8, 1e-3]"
        )));
    }
    let (fm, tm) = ev.eval_traced(x - h);
    let (f0, t0) = ev.eval_traced(x);
    let (fp, tp) = ev.eval_traced(x + h);
    let value = match order {
        DiffOrder::First => (fp - fm) / (2.0 * h),
        DiffOrder::Second => (fp - 2.0 * f0 + fm) / (h * h),
    };
    let margin = 10.0 * h;
    let near_kink = t0.min_gap < margin
        || tm.min_gap < margin
        || tp.min_gap < margin
        || tm.pattern != t0.pattern
        || tp.pattern != t0.pattern;
    Ok(DerivativeProbe {
        x,
        h,
        order: order.as_u8(),
        value,
        near_kink,
    })
}

/// Deterministic network with weights and biases uniform in `[-2, 2]` and
/// signs uniform in `{-1, +1}`.
pub fn random_network(
    node_kind: NodeKind,
    depth: usize,
    widths: &[usize],
    seed: u64,
) -> Result<NetworkSpec, SpecError> {
    if widths.len() != depth {
        return Err(SpecError::layer(
            0,
            format!("depth {depth} but {} hidden widths", widths.len()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = RANDOM_WEIGHT_RANGE;
    let mut in_dim = 1;
    let mut layers = Vec::with_capacity(depth + 1);
    for &width in widths.iter().chain(std::iter::once(&1)) {
        let weights = (0..width)
            .map(|_| (0..in_dim).map(|_| rng.gen_range(-r..=r)).collect())
            .collect();
        let biases = (0..width).map(|_| rng.gen_range(-r..=r)).collect();
        let signs = (node_kind == NodeKind::SignedMaxSum).then(|| {
            (0..width)
                .map(|_| {
                    (0..in_dim)
                        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                        .collect()
                })
                .collect()
        });
        layers.push(LayerSpec {
            weights,
            biases,
            signs,
        });
        in_dim = width;
    }
    NetworkSpec::new(node_kind, layers)
}

/// Draws `(depth, widths)` with `depth <= max_depth` and every width in
/// `1..=max_width`.
pub fn random_shape(rng: &mut impl Rng, max_depth: usize, max_width: usize) -> (usize, Vec<usize>) {
    let depth = rng.gen_range(0..=max_depth);
    let widths = (0..depth).map(|_| rng.gen_range(1..=max_width)).collect();
    (depth, widths)
}
