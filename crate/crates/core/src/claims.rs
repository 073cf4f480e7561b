//! Named, sampled checks of the structural claims about the node families.
//!
//! Every check returns evidence (counts, worst deviations, seeds) rather
//! than a proof: a pass means no counterexample turned up in the sample.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::activation::ActivationKind;
use crate::approx::{self, TargetFunction, TargetId, DEFAULT_GRID};
use crate::canonicalize::{
    canonicalize_max_sum_with, canonicalize_signed_max_sum, f_add_const, f_join, reduce_pair,
    reduce_pair_cases_swapped, scale_by_sign, CanonError, FClassForm, PairReducer,
};
use crate::network::{
    probe_with, random_network, random_shape, DiffOrder, Evaluator, LayerSpec, NetworkSpec,
};
use crate::nodes::{log_domain_dot, NodeKind};
use crate::signed_log::{lns_mul, Sign, SignedLogValue};

/// Probe step for first differences.
pub const FIRST_STEP: f64 = 1e-5;
/// Probe step for second differences; larger to keep round-off below the
/// tolerance.
pub const SECOND_STEP: f64 = 1e-3;
/// Probes per network.
pub const PROBES_PER_NET: usize = 200;
/// Largest depth and width of sampled networks.
pub const MAX_DEPTH: usize = 4;
pub const MAX_WIDTH: usize = 8;

/// Soundness grid: 1000 points on `[-20, 20]`.
const SOUND_LO: f64 = -20.0;
const SOUND_HI: f64 = 20.0;
const SOUND_POINTS: usize = 1000;

/// Probe interval for the derivative claims. The max*-sum slope bound is
/// strict but the gap to 1 shrinks exponentially as `x` grows, so that
/// claim is probed on a bounded window.
const PROBE_LO: f64 = -10.0;
const PROBE_HI: f64 = 10.0;
const SMOOTH_PROBE_LO: f64 = -5.0;
const SMOOTH_PROBE_HI: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Smoke,
    Full,
}

impl Scale {
    /// Networks sampled per claim.
    pub fn nets(self) -> usize {
        match self {
            Scale::Smoke => 50,
            Scale::Full => 500,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scale::Smoke => "smoke",
            Scale::Full => "full",
        }
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "smoke" => Ok(Scale::Smoke),
            "full" => Ok(Scale::Full),
            other => Err(format!("unknown scale `{other}` (expected smoke or full)")),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Deliberate defects used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Exchange the two case formulas of the pair reduction.
    SwapReductionCases,
    /// Multiply LNS values without combining their signs.
    DropSignXor,
}

impl Mutation {
    fn reducer(self) -> PairReducer {
        match self {
            Mutation::SwapReductionCases => reduce_pair_cases_swapped,
            _ => reduce_pair,
        }
    }

    fn lns_mul(self) -> fn(SignedLogValue, SignedLogValue) -> SignedLogValue {
        match self {
            Mutation::DropSignXor => lns_mul_unsigned,
            _ => lns_mul,
        }
    }
}

fn lns_mul_unsigned(a: SignedLogValue, b: SignedLogValue) -> SignedLogValue {
    if a.is_zero() || b.is_zero() {
        return SignedLogValue::ZERO;
    }
    SignedLogValue::from_parts(Sign::Pos, a.log_mag() + b.log_mag()).expect("finite log sum")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub status: Status,
    pub evidence: Value,
    pub anchor: String,
}

impl ClaimCheck {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

type Runner = fn(&Ctx) -> (bool, Value);

struct Claim {
    id: &'static str,
    anchor: &'static str,
    run: Runner,
}

const CLAIMS: [Claim; 8] = [
    Claim {
        id: "lemma1",
        anchor:
            "a network whose slope stays in [a, b] cannot track a target whose slope leaves [a, b]",
        run: check_lemma1,
    },
    Claim {
        id: "thm1",
        anchor: "every max-sum network computes max(w0, w1 + x)",
        run: check_thm1,
    },
    Claim {
        id: "thm2",
        anchor: "signed max-sum networks have slope in {-1, 0, 1} almost everywhere",
        run: check_thm2,
    },
    Claim {
        id: "thm3",
        anchor: "max*-sum networks with slope-bounded activations have slope in [0, 1)",
        run: check_thm3,
    },
    Claim {
        id: "prop1",
        anchor: "relu sum-product networks have zero second derivative almost everywhere",
        run: check_prop1,
    },
    Claim {
        id: "lemma2",
        anchor: "(a1 + (b1 v x)) v (a2 + (b2 v x)) reduces to w0 v (w1 + x)",
        run: check_lemma2,
    },
    Claim {
        id: "lemma3",
        anchor:
            "max(c1, c2 - x, c3 + x) forms are closed under max, shifts and single-term negation",
        run: check_lemma3,
    },
    Claim {
        id: "eq6-lns-equiv",
        anchor:
            "ln sum(a_i b_i) = max*(ln a_i + ln b_i); signed LNS networks match linear arithmetic",
        run: check_lns_equiv,
    },
];

/// Claim ids in report order.
pub fn claim_ids() -> Vec<&'static str> {
    CLAIMS.iter().map(|c| c.id).collect()
}

pub fn anchor(id: &str) -> Option<&'static str> {
    CLAIMS.iter().find(|c| c.id == id).map(|c| c.anchor)
}

/// Module invariants and the claim that exercises each.
pub const INVARIANT_MAP: &[(&str, &str)] = &[
    ("approx: floor consistency", "lemma1"),
    ("approx: universality contrast", "lemma1"),
    ("approx: tropical shortcut", "lemma1"),
    ("canonicalize: max-sum soundness", "thm1"),
    ("canonicalize: pair reduction", "lemma2"),
    ("canonicalize: class F closure", "lemma3"),
    ("canonicalize: signed soundness", "thm2"),
    ("network: signed slope set", "thm2"),
    ("network: max* slope box", "thm3"),
    ("network: relu curvature", "prop1"),
    ("signed_log: log-domain dot", "eq6-lns-equiv"),
    ("network: lns twin", "eq6-lns-equiv"),
];

/// Invariants that point at unknown claims, and claims with no invariant.
pub fn coverage_gaps() -> (Vec<&'static str>, Vec<&'static str>) {
    let ids = claim_ids();
    let orphans = INVARIANT_MAP
        .iter()
        .filter(|(_, c)| !ids.contains(c))
        .map(|(i, _)| *i)
        .collect();
    let uncovered = ids
        .into_iter()
        .filter(|id| !INVARIANT_MAP.iter().any(|(_, c)| c == id))
        .collect();
    (orphans, uncovered)
}

struct Ctx {
    seed: u64,
    scale: Scale,
    mutation: Mutation,
}

impl Ctx {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
    }

    /// `(depth, widths, net seed)` for every sampled network of one claim.
    fn shapes(&self, salt: u64) -> Vec<(usize, Vec<usize>, u64)> {
        let mut rng = self.rng(salt);
        (0..self.scale.nets())
            .map(|_| {
                let (d, w) = random_shape(&mut rng, MAX_DEPTH, MAX_WIDTH);
                (d, w, rng.gen())
            })
            .collect()
    }

    fn nets(&self, kind: NodeKind, salt: u64) -> Vec<(NetworkSpec, u64)> {
        self.shapes(salt)
            .into_iter()
            .map(|(d, w, s)| (random_network(kind, d, &w, s).expect("valid shape"), s))
            .collect()
    }
}

pub fn run_all(seed: u64, scale: Scale) -> Vec<ClaimCheck> {
    run_all_with(seed, scale, Mutation::None)
}

pub fn run_all_with(seed: u64, scale: Scale, mutation: Mutation) -> Vec<ClaimCheck> {
    let ctx = Ctx {
        seed,
        scale,
        mutation,
    };
    CLAIMS
        .par_iter()
        .map(|c| {
            let (ok, evidence) = (c.run)(&ctx);
            ClaimCheck {
                claim: c.id.to_string(),
                status: Status::from_bool(ok),
                evidence,
                anchor: c.anchor.to_string(),
            }
        })
        .collect()
}

/// Runs a single claim by id.
pub fn run_one(id: &str, seed: u64, scale: Scale, mutation: Mutation) -> Option<ClaimCheck> {
    let c = CLAIMS.iter().find(|c| c.id == id)?;
    let ctx = Ctx {
        seed,
        scale,
        mutation,
    };
    let (ok, evidence) = (c.run)(&ctx);
    Some(ClaimCheck {
        claim: c.id.to_string(),
        status: Status::from_bool(ok),
        evidence,
        anchor: c.anchor.to_string(),
    })
}

/// Plain-text table of results.
pub fn render_table(checks: &[ClaimCheck]) -> String {
    let mut out = format!("{:<14} {:<6} anchor\n", "claim", "status");
    for c in checks {
        out.push_str(&format!("{:<14} {:<6} {}\n", c.claim, c.status, c.anchor));
    }
    let passed = checks.iter().filter(|c| c.passed()).count();
    out.push_str(&format!("{passed}/{} claims pass\n", checks.len()));
    out
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Draws probe points until `count` of them are away from kinks.
fn smooth_probes(
    ev: &Evaluator<'_>,
    rng: &mut ChaCha8Rng,
    (lo, hi): (f64, f64),
    h: f64,
    order: DiffOrder,
    count: usize,
) -> (Vec<f64>, usize) {
    let mut values = Vec::with_capacity(count);
    let mut skipped = 0;
    for _ in 0..count * 20 {
        if values.len() == count {
            break;
        }
        let x = rng.gen_range(lo..=hi);
        let p = probe_with(ev, x, h, order).expect("step within range");
        if p.near_kink {
            skipped += 1;
        } else {
            values.push(p.value);
        }
    }
    (values, skipped)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn check_thm1(ctx: &Ctx) -> (bool, Value) {
    let grid = linspace(SOUND_LO, SOUND_HI, SOUND_POINTS);
    let reducer = ctx.mutation.reducer();
    let devs: Vec<f64> = ctx
        .nets(NodeKind::MaxSum, 1)
        .par_iter()
        .map(|(net, _)| {
            let form = canonicalize_max_sum_with(net, reducer).expect("max-sum net");
            let ev = Evaluator::new(net);
            max_of(grid.iter().map(|&x| (form.eval(x) - ev.eval(x)).abs()))
        })
        .collect();
    let worst = max_of(devs.iter().copied());
    let failing = devs.iter().filter(|&&d| d.is_nan() || d > 1e-9).count();
    (
        failing == 0,
        json!({
            "nets": devs.len(),
            "grid_points": SOUND_POINTS,
            "interval": [SOUND_LO, SOUND_HI],
            "max_deviation": worst,
            "tolerance": 1e-9,
            "failing_nets": failing,
            "seed": ctx.seed,
        }),
    )
}

/// Random reduction inputs, with a quarter forced onto each boundary tie.
fn reduction_tuples(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 4]> {
    (0..n)
        .map(|i| {
            let mut t: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-5.0..=5.0));
            match i % 4 {
                1 => t[2] = t[0],
                2 => t[3] = t[1],
                3 => {
                    t[2] = t[0];
                    t[3] = t[1];
                }
                _ => {}
            }
            t
        })
        .collect()
}

pub(crate) fn unreduced(a1: f64, b1: f64, a2: f64, b2: f64, x: f64) -> f64 {
    (a1 + b1.max(x)).max(a2 + b2.max(x))
}

fn check_lemma2(ctx: &Ctx) -> (bool, Value) {
    let n = ctx.scale.nets() * 20;
    let tuples = reduction_tuples(&mut ctx.rng(2), n);
    let grid = linspace(-20.0, 20.0, 100);
    let reducer = ctx.mutation.reducer();
    let mut case1 = 0;
    let mut case2 = 0;
    let mut ties = 0;
    let mut worst: f64 = 0.0;
    for &[a1, b1, a2, b2] in &tuples {
        // the case split depends on which hinge has the larger knee
        let (ha, hb) = if b2 > b1 {
            ((a2, b2), (a1, b1))
        } else {
            ((a1, b1), (a2, b2))
        };
        let c = hb.0 - ha.0;
        if c <= 0.0 {
            case1 += 1;
        } else {
            case2 += 1;
        }
        if a1 == a2 || b1 == b2 {
            ties += 1;
        }
        let f = reducer(a1, b1, a2, b2);
        for &x in &grid {
            worst = worst.max((f.eval(x) - unreduced(a1, b1, a2, b2, x)).abs());
        }
    }
    (
        worst <= 1e-12 && case1 > 0 && case2 > 0,
        json!({
            "tuples": n,
            "points_per_tuple": grid.len(),
            "case1": case1,
            "case2": case2,
            "boundary_ties": ties,
            "max_deviation": worst,
            "tolerance": 1e-12,
            "seed": ctx.seed,
        }),
    )
}

fn random_fclass(rng: &mut ChaCha8Rng) -> FClassForm {
    loop {
        let mut term = || rng.gen_bool(0.6).then(|| rng.gen_range(-5.0..=5.0));
        let (c1, c2, c3) = (term(), term(), term());
        if let Ok(f) = FClassForm::new(c1, c2, c3) {
            return f;
        }
    }
}

fn check_lemma3(ctx: &Ctx) -> (bool, Value) {
    let n = ctx.scale.nets() * 20;
    let mut rng = ctx.rng(3);
    let grid = linspace(-20.0, 20.0, 101);
    let mut worst_join: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    let mut worst_neg: f64 = 0.0;
    let mut negated = 0;
    let mut bad_slopes = 0;
    for _ in 0..n {
        let f = random_fclass(&mut rng);
        let g = random_fclass(&mut rng);
        let k = rng.gen_range(-5.0..=5.0);
        let joined = f_join(f, g);
        let shifted = f_add_const(f, k);
        let neg = (f.term_count() == 1).then(|| scale_by_sign(f, -1.0).expect("single term"));
        negated += usize::from(neg.is_some());
        for &x in &grid {
            worst_join = worst_join.max((joined.eval(x) - f.eval(x).max(g.eval(x))).abs());
            worst_shift = worst_shift.max((shifted.eval(x) - (f.eval(x) + k)).abs());
            if let Some(h) = neg {
                worst_neg = worst_neg.max((h.eval(x) + f.eval(x)).abs());
            }
            if ![-1.0, 0.0, 1.0].contains(&joined.slope_at(x)) {
                bad_slopes += 1;
            }
        }
    }
    let tol = 1e-12;
    (
        worst_join <= tol && worst_shift <= tol && worst_neg <= tol && bad_slopes == 0,
        json!({
            "pairs": n,
            "points_per_pair": grid.len(),
            "max_join_deviation": worst_join,
            "max_shift_deviation": worst_shift,
            "max_negation_deviation": worst_neg,
            "negated_single_terms": negated,
            "slopes_outside_set": bad_slopes,
            "tolerance": tol,
            "seed": ctx.seed,
        }),
    )
}

struct SignedNetResult {
    slope_dist: f64,
    slope_counts: [usize; 3],
    probes: usize,
    skipped: usize,
    canon: Result<f64, CanonError>,
}

fn check_thm2(ctx: &Ctx) -> (bool, Value) {
    let grid = linspace(SOUND_LO, SOUND_HI, SOUND_POINTS);
    let results: Vec<SignedNetResult> = ctx
        .nets(NodeKind::SignedMaxSum, 4)
        .par_iter()
        .map(|(net, s)| {
            let ev = Evaluator::new(net);
            let mut rng = ChaCha8Rng::seed_from_u64(*s);
            let (values, skipped) = smooth_probes(
                &ev,
                &mut rng,
                (PROBE_LO, PROBE_HI),
                FIRST_STEP,
                DiffOrder::First,
                PROBES_PER_NET,
            );
            let mut slope_counts = [0; 3];
            let mut slope_dist: f64 = 0.0;
            for v in &values {
                let (i, d) = [-1.0, 0.0, 1.0]
                    .iter()
                    .map(|t| (v - t).abs())
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |b, (i, d)| if d < b.1 { (i, d) } else { b },
                    );
                slope_counts[i] += 1;
                slope_dist = slope_dist.max(d);
            }
            let canon = canonicalize_signed_max_sum(net)
                .map(|f| max_of(grid.iter().map(|&x| (f.eval(x) - ev.eval(x)).abs())));
            SignedNetResult {
                slope_dist,
                slope_counts,
                probes: values.len(),
                skipped,
                canon,
            }
        })
        .collect();
    let slope_dist = max_of(results.iter().map(|r| r.slope_dist));
    let mut counts = [0; 3];
    for r in &results {
        for (c, n) in counts.iter_mut().zip(r.slope_counts) {
            *c += n;
        }
    }
    let probes: usize = results.iter().map(|r| r.probes).sum();
    let skipped: usize = results.iter().map(|r| r.skipped).sum();
    let short = results.iter().filter(|r| r.probes < PROBES_PER_NET).count();
    let in_f: Vec<f64> = results
        .iter()
        .filter_map(|r| r.canon.as_ref().ok().copied())
        .collect();
    let outside_f = results.len() - in_f.len();
    let canon_dev = max_of(in_f.iter().copied());
    (
        slope_dist <= 1e-5 && canon_dev <= 1e-9 && short == 0,
        json!({
            "nets": results.len(),
            "probes": probes,
            "probes_per_net": PROBES_PER_NET,
            "skipped_near_kink": skipped,
            "nets_short_of_probes": short,
            "interval": [PROBE_LO, PROBE_HI],
            "step": FIRST_STEP,
            "max_distance_to_slope_set": slope_dist,
            "slope_counts": {"-1": counts[0], "0": counts[1], "1": counts[2]},
            "tolerance": 1e-5,
            "canonicalized_in_class_f": in_f.len(),
            "outside_class_f": outside_f,
            "max_canonical_deviation": canon_dev,
            "seed": ctx.seed,
        }),
    )
}

fn check_thm3(ctx: &Ctx) -> (bool, Value) {
    let results: Vec<(f64, f64, usize, usize)> = ctx
        .nets(NodeKind::MaxStarSum(ActivationKind::Relu), 5)
        .par_iter()
        .map(|(net, s)| {
            let ev = Evaluator::new(net);
            let mut rng = ChaCha8Rng::seed_from_u64(*s);
            let (values, skipped) = smooth_probes(
                &ev,
                &mut rng,
                (SMOOTH_PROBE_LO, SMOOTH_PROBE_HI),
                FIRST_STEP,
                DiffOrder::First,
                PROBES_PER_NET,
            );
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi, values.len(), skipped)
        })
        .collect();
    let lo = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let hi = results
        .iter()
        .map(|r| r.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let probes: usize = results.iter().map(|r| r.2).sum();
    let skipped: usize = results.iter().map(|r| r.3).sum();
    let short = results.iter().filter(|r| r.2 < PROBES_PER_NET).count();
    (
        lo >= -1e-6 && hi <= 1.0 - 1e-6 && short == 0,
        json!({
            "nets": results.len(),
            "probes": probes,
            "skipped_near_kink": skipped,
            "nets_short_of_probes": short,
            "interval": [SMOOTH_PROBE_LO, SMOOTH_PROBE_HI],
            "step": FIRST_STEP,
            "min_slope": lo,
            "max_slope": hi,
            "bounds": [-1e-6, 1.0 - 1e-6],
            "seed": ctx.seed,
        }),
    )
}

/// Budget for the single width-16 square fit.
pub const SQUARE_FIT_BUDGET: usize = 20_000;

fn check_prop1(ctx: &Ctx) -> (bool, Value) {
    let relu = NodeKind::SumProduct(ActivationKind::Relu);
    let results: Vec<(f64, usize, usize)> = ctx
        .nets(relu, 6)
        .par_iter()
        .map(|(net, s)| {
            let ev = Evaluator::new(net);
            let mut rng = ChaCha8Rng::seed_from_u64(*s);
            let (values, skipped) = smooth_probes(
                &ev,
                &mut rng,
                (PROBE_LO, PROBE_HI),
                SECOND_STEP,
                DiffOrder::Second,
                PROBES_PER_NET,
            );
            let scale = net.weight_scale().max(1.0);
            // worst ratio to the per-net tolerance
            let ratio = max_of(values.iter().map(|v| v.abs() / (1e-4 * scale * scale)));
            (ratio, values.len(), skipped)
        })
        .collect();
    let ratio = max_of(results.iter().map(|r| r.0));
    let probes: usize = results.iter().map(|r| r.1).sum();
    let skipped: usize = results.iter().map(|r| r.2).sum();
    let short = results.iter().filter(|r| r.1 < PROBES_PER_NET).count();

    let target = TargetFunction::builtin(TargetId::Square);
    let net0 = random_network(relu, 1, &[16], ctx.seed).expect("valid shape");
    let fit = approx::fit(&net0, &target, SQUARE_FIT_BUDGET, ctx.seed);
    (
        ratio <= 1.0 && short == 0 && fit.sup_error < 0.05,
        json!({
            "nets": results.len(),
            "probes": probes,
            "skipped_near_kink": skipped,
            "nets_short_of_probes": short,
            "step": SECOND_STEP,
            "max_second_difference_over_tolerance": ratio,
            "tolerance": "1e-4 * scale^2",
            "square_fit": {
                "widths": [16],
                "budget": SQUARE_FIT_BUDGET,
                "sup_error": fit.sup_error,
                "threshold": 0.05,
            },
            "seed": ctx.seed,
        }),
    )
}

/// One fitted floor comparison for the lemma1 evidence.
fn floor_fit(
    kind: NodeKind,
    widths: &[usize],
    target: TargetId,
    budget: usize,
    seed: u64,
) -> (String, f64, f64) {
    let t = TargetFunction::builtin(target);
    let net0 = random_network(kind, widths.len(), widths, seed).expect("valid shape");
    let r = approx::fit(&net0, &t, budget, seed);
    (
        format!("{}/{}", kind.name(), target.name()),
        r.sup_error,
        r.floor,
    )
}

fn check_lemma1(ctx: &Ctx) -> (bool, Value) {
    let grid_size = DEFAULT_GRID;
    // every sampled net of a bounded family respects the floor of every target
    let families = [
        NodeKind::MaxSum,
        NodeKind::SignedMaxSum,
        NodeKind::MaxStarSum(ActivationKind::Relu),
    ];
    let mut sampled = 0;
    let mut worst_margin = f64::INFINITY;
    for (fi, kind) in families.into_iter().enumerate() {
        let nets = ctx.nets(kind, 10 + fi as u64);
        for id in TargetId::ALL {
            let t = TargetFunction::builtin(id);
            let grid = t.grid(grid_size);
            let floor = approx::floor_for(kind, &t, &grid);
            let margin = nets
                .par_iter()
                .map(|(net, _)| approx::sup_error(net, &t, &grid) - floor)
                .reduce(|| f64::INFINITY, f64::min);
            worst_margin = worst_margin.min(margin);
            sampled += nets.len();
        }
    }
    let budget = 4_000;
    let fits: Vec<(String, f64, f64)> = [
        (NodeKind::MaxSum, vec![4, 4], TargetId::Square),
        (NodeKind::MaxSum, vec![8], TargetId::Double),
        (
            NodeKind::MaxStarSum(ActivationKind::Relu),
            vec![8],
            TargetId::Double,
        ),
        (NodeKind::SignedMaxSum, vec![4, 4], TargetId::HalfSlope),
        (
            NodeKind::MaxStarSum(ActivationKind::Relu),
            vec![8],
            TargetId::Neg,
        ),
    ]
    .par_iter()
    .map(|(k, w, t)| floor_fit(*k, w, *t, budget, ctx.seed))
    .collect();
    let fit_margin = fits.iter().map(|f| f.1 - f.2).fold(f64::INFINITY, f64::min);

    // universal families on the same targets, and the LNS twin of each fit
    let relu = NodeKind::SumProduct(ActivationKind::Relu);
    let universal: Vec<(String, f64, f64)> = [TargetId::Square, TargetId::Double]
        .par_iter()
        .map(|&id| {
            let t = TargetFunction::builtin(id);
            let net0 = random_network(relu, 1, &[16], ctx.seed).expect("valid shape");
            let r = approx::fit(&net0, &t, SQUARE_FIT_BUDGET, ctx.seed);
            let twin = r.net.with_kind(NodeKind::Lns(ActivationKind::Relu));
            let gap = (approx::sup_error(&twin, &t, &t.grid(grid_size)) - r.sup_error).abs();
            (id.name().to_string(), r.sup_error, gap)
        })
        .collect();
    let lns_twin_gap = max_of(universal.iter().map(|u| u.2));
    let universal_ok = universal.iter().all(|u| u.1 < 0.05);

    // fitting the two-parameter form directly lands on the same error
    let square = TargetFunction::builtin(TargetId::Square);
    let (form, e_ms) = approx::tropical_floor(&square, &square.grid(grid_size));
    let (_, direct) = approx::fit_tropical(&square, budget, ctx.seed, grid_size);
    let shortcut_gap = (direct - fits[0].1).abs();
    let ok = worst_margin >= -1e-6
        && fit_margin >= -1e-6
        && universal_ok
        && lns_twin_gap <= 1e-6
        && direct >= e_ms - 1e-6
        && shortcut_gap <= 1e-4;
    (
        ok,
        json!({
            "sampled_net_target_pairs": sampled,
            "min_sampled_margin_over_floor": worst_margin,
            "fits": fits.iter().map(|f| json!({"fit": f.0, "sup_error": f.1, "floor": f.2})).collect::<Vec<_>>(),
            "min_fit_margin_over_floor": fit_margin,
            "fit_budget": budget,
            "tropical_floor_square": {"w0": form.w0, "w1": form.w1, "floor": e_ms},
            "direct_tropical_fit_square": direct,
            "max_sum_vs_direct_gap": shortcut_gap,
            "sum_product_fits": universal.iter().map(|f| json!({"target": f.0, "widths": [16], "sup_error": f.1, "lns_twin_gap": f.2})).collect::<Vec<_>>(),
            "universal_threshold": 0.05,
            "lns_twin_max_gap": lns_twin_gap,
            "grid_size": grid_size,
            "seed": ctx.seed,
        }),
    )
}

/// Copy of `net` with every weight and bias replaced by its magnitude,
/// evaluated at `|x|`: bounds every intermediate magnitude of `net`.
pub fn magnitude_bound(net: &NetworkSpec) -> NetworkSpec {
    let layers = net
        .layers()
        .iter()
        .map(|l| LayerSpec {
            weights: l
                .weights
                .iter()
                .map(|r| r.iter().map(|w| w.abs()).collect())
                .collect(),
            biases: l.biases.iter().map(|b| b.abs()).collect(),
            signs: None,
        })
        .collect();
    NetworkSpec::new(NodeKind::SumProduct(ActivationKind::Identity), layers).expect("same shape")
}

/// Points whose linear output is this small relative to the magnitude
/// bound are treated as near-cancellations and skipped.
pub const CANCELLATION_FRACTION: f64 = 1e-3;

fn check_lns_equiv(ctx: &Ctx) -> (bool, Value) {
    let mut rng = ctx.rng(7);
    let cases = 1000.max(ctx.scale.nets() * 2);
    let mut dot_dev: f64 = 0.0;
    for _ in 0..cases {
        let n = rng.gen_range(1..=16);
        let a: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-3.0..=3.0)))
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-3.0..=3.0)))
            .collect();
        let direct = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>().ln();
        let la: Vec<f64> = a.iter().map(|v| v.ln()).collect();
        let lb: Vec<f64> = b.iter().map(|v| v.ln()).collect();
        let logd = log_domain_dot(&la, &lb).expect("equal lengths");
        dot_dev = dot_dev.max((direct - logd).abs());
    }

    let mut sign_errors = 0;
    for _ in 0..cases {
        let x = rng.gen_range(-4.0..=4.0);
        let y = rng.gen_range(-4.0..=4.0);
        let p = ctx.mutation.lns_mul()(
            SignedLogValue::from_linear(x).expect("finite"),
            SignedLogValue::from_linear(y).expect("finite"),
        )
        .to_linear();
        if (p - x * y).abs() > 1e-12 * (x * y).abs().max(1e-300) {
            sign_errors += 1;
        }
    }

    let mul = ctx.mutation.lns_mul();
    let points = linspace(-10.0, 10.0, 201);
    let results: Vec<(f64, usize, usize)> = ctx
        .nets(NodeKind::Lns(ActivationKind::Relu), 8)
        .par_iter()
        .map(|(net, _)| {
            let lns = Evaluator::new(net).with_lns_mul(mul);
            let twin = net.with_kind(NodeKind::SumProduct(ActivationKind::Relu));
            let lin = Evaluator::new(&twin);
            let bound_net = magnitude_bound(net);
            let bound = Evaluator::new(&bound_net);
            let mut worst: f64 = 0.0;
            let (mut checked, mut skipped) = (0, 0);
            for &x in &points {
                let y = lin.eval(x);
                let m = bound.eval(x.abs());
                if y.abs() < CANCELLATION_FRACTION * m {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                worst = worst.max((lns.eval(x) - y).abs() / y.abs());
            }
            (worst, checked, skipped)
        })
        .collect();
    let net_dev = max_of(results.iter().map(|r| r.0));
    let checked: usize = results.iter().map(|r| r.1).sum();
    let skipped: usize = results.iter().map(|r| r.2).sum();
    (
        dot_dev <= 1e-11 && sign_errors == 0 && net_dev <= 1e-9,
        json!({
            "dot_cases": cases,
            "max_log_dot_deviation": dot_dev,
            "dot_tolerance": 1e-11,
            "product_cases": cases,
            "product_errors": sign_errors,
            "nets": results.len(),
            "points_checked": checked,
            "points_skipped_near_cancellation": skipped,
            "max_relative_network_deviation": net_dev,
            "network_tolerance": 1e-9,
            "seed": ctx.seed,
        }),
    )
}
