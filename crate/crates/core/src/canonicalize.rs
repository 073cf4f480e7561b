//! Symbolic collapse of max-sum networks to `max(w0, w1 + x)` and of signed
//! max-sum networks to the class
//! `F = { max of a subset of {c1, c2 - x, c3 + x} }`.
//!
//! Max-sum networks are folded bottom-up: each unit is rewritten with
//! `b ∨ (w + x) = w + ((b - w) ∨ x)` and neighbouring terms are merged by
//! [`reduce_pair`]. Signed networks follow the same induction with
//! [`f_add_const`], [`scale_by_sign`] and [`f_join`].
//!
//! A `-1` sign applied to a multi-term member of `F` produces a minimum of
//! affine pieces, which is concave and therefore not in `F`. Such networks
//! are rejected with [`CanonError::OutsideClassF`]; their derivatives still
//! lie in `{-1, 0, 1}` almost everywhere (see the network probes).

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::network::NetworkSpec;
use crate::nodes::NodeKind;

/// `x ↦ max(w0, w1 + x)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TropicalAffineForm {
    pub w0: f64,
    pub w1: f64,
}

impl TropicalAffineForm {
    pub fn new(w0: f64, w1: f64) -> Self {
        TropicalAffineForm { w0, w1 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.w0.max(self.w1 + x)
    }

    /// Slope away from the knee `x = w0 - w1`: 0 on the plateau, 1 after.
    pub fn slope_at(&self, x: f64) -> f64 {
        if self.w1 + x > self.w0 {
            1.0
        } else {
            0.0
        }
    }

    /// `w + f`
    pub fn shift(&self, w: f64) -> Self {
        TropicalAffineForm::new(w + self.w0, w + self.w1)
    }

    /// `b ∨ f`
    pub fn join_const(&self, b: f64) -> Self {
        TropicalAffineForm::new(self.w0.max(b), self.w1)
    }

    /// Rewrites `w0 ∨ (w1 + x)` as `a + (b ∨ x)` with `a = w1`, `b = w0 - w1`.
    pub fn to_hinge(&self) -> Hinge {
        Hinge {
            offset: self.w1,
            knee: self.w0 - self.w1,
        }
    }
}

/// `x ↦ offset + max(knee, x)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hinge {
    pub offset: f64,
    pub knee: f64,
}

impl Hinge {
    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.knee.max(x)
    }
}

/// Signature shared by [`reduce_pair`] and its test mutants.
pub type PairReducer = fn(f64, f64, f64, f64) -> TropicalAffineForm;

/// Merges `(a1 + (b1 ∨ x)) ∨ (a2 + (b2 ∨ x))` into `w0 ∨ (w1 + x)`.
///
/// With `c = a2 - a1`:
/// * `b1 > b2, c < 0`: `w0 = a1 + b1`, `w1 = a1`
/// * `b1 > b2, c > 0`: `w0 = a1 + (b1 ∨ (b2 + c))`, `w1 = a1 + c`
/// * `b2 > b1`: operands swapped, since
///   `g = a1 + c + ((-c + (b1 ∨ x)) ∨ (b2 ∨ x))`.
///
/// `c = 0` takes the first formula. `b1 = b2` stays unswapped when `c <= 0`
/// and swaps otherwise, so the first formula applies there as well.
pub fn reduce_pair(a1: f64, b1: f64, a2: f64, b2: f64) -> TropicalAffineForm {
    let c = a2 - a1;
    if b2 > b1 || (b1 == b2 && c > 0.0) {
        return reduce_pair(a2, b2, a1, b1);
    }
    if c <= 0.0 {
        TropicalAffineForm::new(a1 + b1, a1)
    } else {
        TropicalAffineForm::new(a1 + b1.max(b2 + c), a1 + c)
    }
}

/// Mutant of [`reduce_pair`] with the two case formulas exchanged. Used to
/// show that the reduction checks are not vacuous.
pub fn reduce_pair_cases_swapped(a1: f64, b1: f64, a2: f64, b2: f64) -> TropicalAffineForm {
    let c = a2 - a1;
    if b2 > b1 || (b1 == b2 && c > 0.0) {
        return reduce_pair_cases_swapped(a2, b2, a1, b1);
    }
    if c <= 0.0 {
        TropicalAffineForm::new(a1 + b1.max(b2 + c), a1 + c)
    } else {
        TropicalAffineForm::new(a1 + b1, a1)
    }
}

fn reduce_hinges(reduce: PairReducer, p: Hinge, q: Hinge) -> TropicalAffineForm {
    reduce(p.offset, p.knee, q.offset, q.knee)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CanonError {
    #[error("expected a {expected} network, got {got}")]
    WrongKind { expected: &'static str, got: String },
    #[error(
        "layer {layer} unit {unit}: sign -1 on input {input} negates a {terms}-term form, which leaves class F"
    )]
    OutsideClassF {
        layer: usize,
        unit: usize,
        input: usize,
        terms: usize,
    },
}

/// Collapses a max-sum network into `max(w0, w1 + x)`.
pub fn canonicalize_max_sum(net: &NetworkSpec) -> Result<TropicalAffineForm, CanonError> {
    canonicalize_max_sum_with(net, reduce_pair)
}

/// [`canonicalize_max_sum`] with a caller-supplied pair reduction.
pub fn canonicalize_max_sum_with(
    net: &NetworkSpec,
    reduce: PairReducer,
) -> Result<TropicalAffineForm, CanonError> {
    if net.node_kind() != NodeKind::MaxSum {
        return Err(CanonError::WrongKind {
            expected: "max-sum",
            got: net.node_kind().to_string(),
        });
    }
    let layers = net.layers();
    // first layer: b ∨ (w + x), already in (w0, w1) form
    let mut forms: Vec<TropicalAffineForm> = layers[0]
        .weights
        .iter()
        .zip(&layers[0].biases)
        .map(|(row, &b)| TropicalAffineForm::new(b, row[0]))
        .collect();
    for layer in &layers[1..] {
        forms = layer
            .weights
            .iter()
            .zip(&layer.biases)
            .map(|(row, &b)| {
                let mut terms = row.iter().zip(&forms).map(|(&w, g)| g.shift(w));
                let first = terms.next().expect("validated width");
                let folded = terms.fold(first, |acc, t| {
                    reduce_hinges(reduce, acc.to_hinge(), t.to_hinge())
                });
                folded.join_const(b)
            })
            .collect();
    }
    Ok(forms[0])
}

/// Member of class `F`: the max of the present terms among
/// `c1`, `c2 - x`, `c3 + x`. At least one term is present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FClassForm {
    c1: Option<f64>,
    c2: Option<f64>,
    c3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FClassError {
    #[error("a class F form needs at least one term")]
    Empty,
    #[error("negating a {0}-term form gives a minimum of affine pieces, outside class F")]
    NegationLeavesClassF(usize),
    #[error("sign {0} is not -1 or +1")]
    InvalidSign(f64),
}

impl FClassForm {
    pub fn new(c1: Option<f64>, c2: Option<f64>, c3: Option<f64>) -> Result<Self, FClassError> {
        if c1.is_none() && c2.is_none() && c3.is_none() {
            return Err(FClassError::Empty);
        }
        Ok(FClassForm { c1, c2, c3 })
    }

    /// `c`
    pub fn constant(c: f64) -> Self {
        FClassForm {
            c1: Some(c),
            c2: None,
            c3: None,
        }
    }

    /// `c - x`
    pub fn falling(c: f64) -> Self {
        FClassForm {
            c1: None,
            c2: Some(c),
            c3: None,
        }
    }

    /// `c + x`
    pub fn rising(c: f64) -> Self {
        FClassForm {
            c1: None,
            c2: None,
            c3: Some(c),
        }
    }

    /// `σ_{a1,a2,a3}(x) = (a1 - x) ∨ a2 ∨ (a3 + x)`, all three terms present.
    pub fn sigma(a1: f64, a2: f64, a3: f64) -> Self {
        FClassForm {
            c1: Some(a2),
            c2: Some(a1),
            c3: Some(a3),
        }
    }

    pub fn c1(&self) -> Option<f64> {
        self.c1
    }

    pub fn c2(&self) -> Option<f64> {
        self.c2
    }

    pub fn c3(&self) -> Option<f64> {
        self.c3
    }

    pub fn term_count(&self) -> usize {
        [self.c1, self.c2, self.c3]
            .iter()
            .filter(|c| c.is_some())
            .count()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let terms = [self.c1, self.c2.map(|c| c - x), self.c3.map(|c| c + x)];
        terms
            .into_iter()
            .flatten()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Slope of the active term at `x`, in `{-1, 0, 1}`.
    pub fn slope_at(&self, x: f64) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (v, slope) in [
            (self.c1, 0.0),
            (self.c2.map(|c| c - x), -1.0),
            (self.c3.map(|c| c + x), 1.0),
        ] {
            if let Some(v) = v {
                if v > best.0 {
                    best = (v, slope);
                }
            }
        }
        best.1
    }
}

fn opt_max(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// `f ∨ g`: per-slope maximum of present terms.
pub fn f_join(f: FClassForm, g: FClassForm) -> FClassForm {
    FClassForm {
        c1: opt_max(f.c1, g.c1),
        c2: opt_max(f.c2, g.c2),
        c3: opt_max(f.c3, g.c3),
    }
}

/// `k + f`
pub fn f_add_const(f: FClassForm, k: f64) -> FClassForm {
    FClassForm {
        c1: f.c1.map(|c| c + k),
        c2: f.c2.map(|c| c + k),
        c3: f.c3.map(|c| c + k),
    }
}

/// `a · f` for `a ∈ {-1, +1}`. Negation is accepted only for single-term
/// forms: `c ↦ -c`, `c - x ↦ -c + x`, `c + x ↦ -c - x`.
pub fn scale_by_sign(f: FClassForm, a: f64) -> Result<FClassForm, FClassError> {
    if a == 1.0 {
        return Ok(f);
    }
    if a != -1.0 {
        return Err(FClassError::InvalidSign(a));
    }
    if f.term_count() != 1 {
        return Err(FClassError::NegationLeavesClassF(f.term_count()));
    }
    Ok(FClassForm {
        c1: f.c1.map(|c| -c),
        c2: f.c3.map(|c| -c),
        c3: f.c2.map(|c| -c),
    })
}

/// Collapses a signed max-sum network into class `F`.
pub fn canonicalize_signed_max_sum(net: &NetworkSpec) -> Result<FClassForm, CanonError> {
    if net.node_kind() != NodeKind::SignedMaxSum {
        return Err(CanonError::WrongKind {
            expected: "signed-max-sum",
            got: net.node_kind().to_string(),
        });
    }
    let layers = net.layers();
    let mut forms: Vec<FClassForm> = Vec::new();
    for (li, layer) in layers.iter().enumerate() {
        let signs = layer.signs.as_ref().expect("validated signed layer");
        let mut next = Vec::with_capacity(layer.width());
        for (u, (row, &b)) in layer.weights.iter().zip(&layer.biases).enumerate() {
            let mut acc: Option<FClassForm> = None;
            for (j, (&w, &a)) in row.iter().zip(&signs[u]).enumerate() {
                let inner = if li == 0 {
                    FClassForm::rising(w)
                } else {
                    f_add_const(forms[j], w)
                };
                let term = scale_by_sign(inner, a).map_err(|_| CanonError::OutsideClassF {
                    layer: li,
                    unit: u,
                    input: j,
                    terms: inner.term_count(),
                })?;
                acc = Some(match acc {
                    Some(prev) => f_join(prev, term),
                    None => term,
                });
            }
            let joined = acc.expect("validated width");
            next.push(f_join(joined, FClassForm::constant(b)));
        }
        forms = next;
    }
    Ok(forms[0])
}

/// Either canonical form, tagged by `kind` in JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalForm {
    Tropical(TropicalAffineForm),
    FClass(FClassForm),
}

impl CanonicalForm {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CanonicalForm::Tropical(t) => t.eval(x),
            CanonicalForm::FClass(f) => f.eval(x),
        }
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        match self {
            CanonicalForm::Tropical(t) => t.slope_at(x),
            CanonicalForm::FClass(f) => f.slope_at(x),
        }
    }
}

/// Canonicalizes either max kind.
pub fn canonicalize(net: &NetworkSpec) -> Result<CanonicalForm, CanonError> {
    match net.node_kind() {
        NodeKind::MaxSum => canonicalize_max_sum(net).map(CanonicalForm::Tropical),
        NodeKind::SignedMaxSum => canonicalize_signed_max_sum(net).map(CanonicalForm::FClass),
        other => Err(CanonError::WrongKind {
            expected: "max-sum or signed-max-sum",
            got: other.to_string(),
        }),
    }
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c3: Option<f64>,
}

impl Serialize for CanonicalForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let doc = match *self {
            CanonicalForm::Tropical(t) => FormJson {
                kind: "tropical".into(),
                w0: Some(t.w0),
                w1: Some(t.w1),
                c1: None,
                c2: None,
                c3: None,
            },
            CanonicalForm::FClass(f) => FormJson {
                kind: "fclass".into(),
                w0: None,
                w1: None,
                c1: f.c1,
                c2: f.c2,
                c3: f.c3,
            },
        };
        doc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = FormJson::deserialize(d)?;
        match doc.kind.as_str() {
            "tropical" => match (doc.w0, doc.w1) {
                (Some(w0), Some(w1)) => {
                    Ok(CanonicalForm::Tropical(TropicalAffineForm::new(w0, w1)))
                }
                _ => Err(D::Error::custom("tropical form needs w0 and w1")),
            },
            "fclass" => FClassForm::new(doc.c1, doc.c2, doc.c3)
                .map(CanonicalForm::FClass)
                .map_err(D::Error::custom),
            other => Err(D::Error::custom(format!("unknown form kind `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{evaluate, random_network, LayerSpec};
    use proptest::prelude::*;

    fn unreduced(a1: f64, b1: f64, a2: f64, b2: f64, x: f64) -> f64 {
        (a1 + b1.max(x)).max(a2 + b2.max(x))
    }

    #[test]
    fn reduce_pair_case_one() {
        assert_eq!(
            reduce_pair(0.0, 1.0, -1.0, 0.0),
            TropicalAffineForm::new(1.0, 0.0)
        );
    }

    #[test]
    fn reduce_pair_case_two() {
        assert_eq!(
            reduce_pair(0.0, 2.0, 1.0, 0.0),
            TropicalAffineForm::new(2.0, 1.0)
        );
    }

    #[test]
    fn reduce_pair_degenerate() {
        let f = reduce_pair(0.0, 0.0, 0.0, 0.0);
        assert_eq!(f, TropicalAffineForm::new(0.0, 0.0));
        for i in -50..=50 {
            let x = i as f64 * 0.1;
            assert_eq!(f.eval(x), unreduced(0.0, 0.0, 0.0, 0.0, x));
        }
    }

    #[test]
    fn reduce_pair_boundary_ties() {
        // c = 0, b1 = b2, and both at once
        let cases = [
            (1.0, 2.0, 1.0, -1.0),
            (1.0, -1.0, 1.0, 2.0),
            (0.5, 1.0, -0.5, 1.0),
            (-0.5, 1.0, 0.5, 1.0),
            (0.5, 1.0, 0.5, 1.0),
        ];
        for (a1, b1, a2, b2) in cases {
            let f = reduce_pair(a1, b1, a2, b2);
            for i in -40..=40 {
                let x = i as f64 * 0.25;
                assert_eq!(
                    f.eval(x),
                    unreduced(a1, b1, a2, b2, x),
                    "{a1} {b1} {a2} {b2} @ {x}"
                );
            }
        }
    }

    #[test]
    fn swapped_mutant_disagrees() {
        let f = reduce_pair_cases_swapped(0.0, 1.0, -1.0, 0.0);
        assert!((f.eval(10.0) - unreduced(0.0, 1.0, -1.0, 0.0, 10.0)).abs() > 0.5);
    }

    #[test]
    fn canon_max_sum_zero_net() {
        let net = NetworkSpec::new(
            NodeKind::MaxSum,
            vec![
                LayerSpec {
                    weights: vec![vec![0.0]],
                    biases: vec![0.0],
                    signs: None,
                },
                LayerSpec {
                    weights: vec![vec![0.0]],
                    biases: vec![0.0],
                    signs: None,
                },
            ],
        )
        .unwrap();
        assert_eq!(
            canonicalize_max_sum(&net).unwrap(),
            TropicalAffineForm::new(0.0, 0.0)
        );
    }

    #[test]
    fn canon_rejects_wrong_kind() {
        let net = random_network(NodeKind::SignedMaxSum, 1, &[2], 0).unwrap();
        assert!(matches!(
            canonicalize_max_sum(&net),
            Err(CanonError::WrongKind { .. })
        ));
        let net = random_network(NodeKind::MaxSum, 1, &[2], 0).unwrap();
        assert!(matches!(
            canonicalize_signed_max_sum(&net),
            Err(CanonError::WrongKind { .. })
        ));
    }

    #[test]
    fn f_join_examples() {
        let got = f_join(
            FClassForm::sigma(1.0, 2.0, 3.0),
            FClassForm::sigma(0.0, 5.0, 1.0),
        );
        assert_eq!(got, FClassForm::sigma(1.0, 5.0, 3.0));
        let f = FClassForm::new(Some(0.3), None, Some(-2.0)).unwrap();
        assert_eq!(f_join(f, f), f);
        let abs = f_join(FClassForm::falling(0.0), FClassForm::rising(0.0));
        assert_eq!(abs, FClassForm::new(None, Some(0.0), Some(0.0)).unwrap());
        assert_eq!(abs.eval(-3.0), 3.0);
        assert_eq!(abs.eval(2.0), 2.0);
    }

    #[test]
    fn shift_and_sign_examples() {
        // σ_{1,2,3} + 5 = σ_{6,7,8}
        assert_eq!(
            f_add_const(FClassForm::sigma(1.0, 2.0, 3.0), 5.0),
            FClassForm::sigma(6.0, 7.0, 8.0)
        );
        assert_eq!(
            scale_by_sign(FClassForm::constant(4.0), -1.0).unwrap(),
            FClassForm::constant(-4.0)
        );
        assert_eq!(
            scale_by_sign(FClassForm::rising(0.0), -1.0).unwrap(),
            FClassForm::falling(0.0)
        );
        let two = FClassForm::new(Some(1.0), None, Some(0.0)).unwrap();
        assert_eq!(scale_by_sign(two, 1.0).unwrap(), two);
        assert_eq!(
            scale_by_sign(two, -1.0),
            Err(FClassError::NegationLeavesClassF(2))
        );
        assert_eq!(scale_by_sign(two, 0.5), Err(FClassError::InvalidSign(0.5)));
        assert_eq!(FClassForm::new(None, None, None), Err(FClassError::Empty));
    }

    #[test]
    fn abs_network() {
        // x ↦ -10 ∨ -(0 + x) ∨ (0 + x) = |x| away from the floor
        let net = NetworkSpec::new(
            NodeKind::SignedMaxSum,
            vec![
                LayerSpec {
                    weights: vec![vec![0.0], vec![0.0]],
                    biases: vec![-10.0, -10.0],
                    signs: Some(vec![vec![-1.0], vec![1.0]]),
                },
                LayerSpec {
                    weights: vec![vec![0.0, 0.0]],
                    biases: vec![-10.0],
                    signs: Some(vec![vec![1.0, 1.0]]),
                },
            ],
        )
        .unwrap();
        let f = canonicalize_signed_max_sum(&net).unwrap();
        assert_eq!(
            f,
            FClassForm::new(Some(-10.0), Some(0.0), Some(0.0)).unwrap()
        );
        for i in -40..=40 {
            let x = i as f64 * 0.5;
            assert_eq!(f.eval(x), evaluate(&net, x));
            assert_eq!(f.eval(x), x.abs().max(-10.0));
        }
    }

    #[test]
    fn negated_hinge_is_rejected() {
        // -(0 ∨ x) = min(0, -x), concave
        let net = NetworkSpec::new(
            NodeKind::SignedMaxSum,
            vec![
                LayerSpec {
                    weights: vec![vec![0.0]],
                    biases: vec![0.0],
                    signs: Some(vec![vec![1.0]]),
                },
                LayerSpec {
                    weights: vec![vec![0.0]],
                    biases: vec![-100.0],
                    signs: Some(vec![vec![-1.0]]),
                },
            ],
        )
        .unwrap();
        let (l, m, r) = (
            evaluate(&net, -1.0),
            evaluate(&net, 0.0),
            evaluate(&net, 1.0),
        );
        // every member of F is convex; this net is strictly concave at 0
        assert!(l + r < 2.0 * m);
        assert_eq!(
            canonicalize_signed_max_sum(&net),
            Err(CanonError::OutsideClassF {
                layer: 1,
                unit: 0,
                input: 0,
                terms: 2
            })
        );
    }

    #[test]
    fn form_json() {
        let t = CanonicalForm::Tropical(TropicalAffineForm::new(0.0, 0.0));
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"kind":"tropical","w0":0.0,"w1":0.0}"#
        );
        let f = CanonicalForm::FClass(FClassForm::new(None, Some(1.5), None).unwrap());
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"kind":"fclass","c2":1.5}"#);
        assert_eq!(serde_json::from_str::<CanonicalForm>(&text).unwrap(), f);
        assert!(serde_json::from_str::<CanonicalForm>(r#"{"kind":"fclass"}"#).is_err());
        assert!(serde_json::from_str::<CanonicalForm>(r#"{"kind":"tropical","w0":1}"#).is_err());
    }

    fn arb_form() -> impl Strategy<Value = FClassForm> {
        (
            prop::option::of(-10.0f64..10.0),
            prop::option::of(-10.0f64..10.0),
            prop::option::of(-10.0f64..10.0),
        )
            .prop_filter_map("non-empty", |(a, b, c)| FClassForm::new(a, b, c).ok())
    }

    proptest! {
        #[test]
        fn depth_zero_is_idempotent(w0 in -1e3f64..1e3, w1 in -1e3f64..1e3) {
            let net = NetworkSpec::new(NodeKind::MaxSum, vec![LayerSpec {
                weights: vec![vec![w1]],
                biases: vec![w0],
                signs: None,
            }]).unwrap();
            prop_assert_eq!(canonicalize_max_sum(&net).unwrap(), TropicalAffineForm::new(w0, w1));
        }

        #[test]
        fn join_is_pointwise_max(f in arb_form(), g in arb_form(), x in -30.0f64..30.0) {
            let j = f_join(f, g);
            prop_assert!(j.term_count() >= f.term_count().max(g.term_count()));
            prop_assert_eq!(j.eval(x), f.eval(x).max(g.eval(x)));
        }

        #[test]
        fn shift_and_single_term_negation_are_pointwise(
            f in arb_form(), k in -10.0f64..10.0, x in -30.0f64..30.0,
        ) {
            let shifted = f_add_const(f, k);
            prop_assert!((shifted.eval(x) - (f.eval(x) + k)).abs() < 1e-12);
            match scale_by_sign(f, -1.0) {
                Ok(n) => prop_assert_eq!(n.eval(x), -f.eval(x)),
                Err(e) => prop_assert_eq!(e, FClassError::NegationLeavesClassF(f.term_count())),
            }
        }
    }
}
