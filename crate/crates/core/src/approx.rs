//! Fitting experiments: how closely each node family can uniformly
//! approximate simple scalar targets, against analytic and brute-force
//! floors.
//!
//! Training is a derivative-free local search (random single-coordinate
//! perturbation, geometric step decay, three restarts) minimizing the
//! sup-norm error on a fixed grid. Max-family objectives are piecewise
//! constant in many parameters, so gradients are of little use there; the
//! claims checked are about representational floors, not trainability.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::canonicalize::{FClassForm, TropicalAffineForm};
use crate::network::{Evaluator, NetworkSpec};
use crate::nodes::NodeKind;

/// Points in the sup-norm grid.
pub const DEFAULT_GRID: usize = 512;
pub const RESTARTS: usize = 3;
const INITIAL_STEP: f64 = 0.5;
const FINAL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetId {
    /// `x²`
    Square,
    /// `2x`
    Double,
    /// `-x`
    Neg,
    /// `x/2`
    HalfSlope,
    /// `sin 2πx`
    SineWave,
}

impl TargetId {
    pub const ALL: [TargetId; 5] = [
        TargetId::Square,
        TargetId::Double,
        TargetId::Neg,
        TargetId::HalfSlope,
        TargetId::SineWave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TargetId::Square => "square",
            TargetId::Double => "double",
            TargetId::Neg => "neg",
            TargetId::HalfSlope => "halfslope",
            TargetId::SineWave => "sinewave",
        }
    }
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TargetId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = TargetId::ALL.iter().map(|t| t.name()).collect();
                format!(
                    "unknown target `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// A scalar target on a closed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetFunction {
    pub id: TargetId,
    pub lo: f64,
    pub hi: f64,
    /// Range of `h'` over the domain, when known.
    pub derivative_range: Option<(f64, f64)>,
}

impl TargetFunction {
    /// The built-in targets, all on `[0, 1]`.
    pub fn builtin(id: TargetId) -> Self {
        use std::f64::consts::TAU;
        let derivative_range = match id {
            TargetId::Square => (0.0, 2.0),
            TargetId::Double => (2.0, 2.0),
            TargetId::Neg => (-1.0, -1.0),
            TargetId::HalfSlope => (0.5, 0.5),
            TargetId::SineWave => (-TAU, TAU),
        };
        TargetFunction {
            id,
            lo: 0.0,
            hi: 1.0,
            derivative_range: Some(derivative_range),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.id {
            TargetId::Square => x * x,
            TargetId::Double => 2.0 * x,
            TargetId::Neg => -x,
            TargetId::HalfSlope => 0.5 * x,
            TargetId::SineWave => (std::f64::consts::TAU * x).sin(),
        }
    }

    /// `n` equally spaced points including both ends.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "grid needs at least two points");
        let step = (self.hi - self.lo) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

/// Largest `|net(x) - h(x)|` over the grid.
pub fn sup_error(net: &NetworkSpec, target: &TargetFunction, grid: &[f64]) -> f64 {
    let ev = Evaluator::new(net);
    grid.iter()
        .map(|&x| (ev.eval(x) - target.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// Largest `ε` such that no function whose derivative lies in `[a, b]`
/// almost everywhere is within `ε` of the target on the grid:
/// `max over c < d` of `(h(d) - h(c) - b(d - c)) / 2` and
/// `(a(d - c) - (h(d) - h(c))) / 2`, clamped at 0.
pub fn lower_bound_floor(target: &TargetFunction, derivative_box: (f64, f64), grid: &[f64]) -> f64 {
    let (a, b) = derivative_box;
    // (h(d) - b d) - (h(c) - b c) with a running minimum over c < d, and the
    // mirrored form for the lower slope bound
    let mut best = 0.0f64;
    let mut min_upper = f64::INFINITY;
    let mut min_lower = f64::INFINITY;
    for &x in grid {
        let hx = target.eval(x);
        let upper = hx - b * x;
        let lower = a * x - hx;
        best = best
            .max((upper - min_upper) / 2.0)
            .max((lower - min_lower) / 2.0);
        min_upper = min_upper.min(upper);
        min_lower = min_lower.min(lower);
    }
    best
}

/// Sup error of `max(w0, w1 + x)` against the target on the grid.
pub fn tropical_error(form: &TropicalAffineForm, target: &TargetFunction, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&x| (form.eval(x) - target.eval(x)).abs())
        .fold(0.0, f64::max)
}

pub fn fclass_error(form: &FClassForm, target: &TargetFunction, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&x| (form.eval(x) - target.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// Best sup error reachable by any `max(w0, w1 + x)`: a coarse 2-D grid over
/// `(w0, w1)` followed by repeated local refinement around the incumbent.
pub fn tropical_floor(target: &TargetFunction, grid: &[f64]) -> (TropicalAffineForm, f64) {
    let (hmin, hmax) = value_range(target, grid);
    let span = (hmax - hmin).max(1.0) + (target.hi - target.lo);
    let w0_range = (hmin - span, hmax + span);
    let w1_range = (hmin - target.hi - span, hmax - target.lo + span);
    let eval = |p: &[f64]| tropical_error(&TropicalAffineForm::new(p[0], p[1]), target, grid);
    let best = grid_refine(&[w0_range, w1_range], 81, &eval);
    (TropicalAffineForm::new(best.0[0], best.0[1]), best.1)
}

/// Best sup error over the three-term members of class F, by 3-D grid and
/// refinement. Two- and one-term members are limits of three-term ones, so
/// this is also the floor over the whole class.
pub fn fclass_floor(target: &TargetFunction, grid: &[f64]) -> (FClassForm, f64) {
    let (hmin, hmax) = value_range(target, grid);
    let span = (hmax - hmin).max(1.0) + (target.hi - target.lo);
    let c1 = (hmin - span, hmax + span);
    let c2 = (hmin + target.lo - span, hmax + target.hi + span);
    let c3 = (hmin - target.hi - span, hmax - target.lo + span);
    let eval = |p: &[f64]| fclass_error(&FClassForm::sigma(p[1], p[0], p[2]), target, grid);
    let best = grid_refine(&[c1, c2, c3], 25, &eval);
    (FClassForm::sigma(best.0[1], best.0[0], best.0[2]), best.1)
}

fn value_range(target: &TargetFunction, grid: &[f64]) -> (f64, f64) {
    grid.iter()
        .map(|&x| target.eval(x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// Exhaustive grid over a box, then 60 rounds of shrinking grids centred on
/// the best point so far.
fn grid_refine(
    bounds: &[(f64, f64)],
    per_axis: usize,
    eval: &dyn Fn(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let dims = bounds.len();
    let mut lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let mut width: Vec<f64> = bounds.iter().map(|b| b.1 - b.0).collect();
    let mut best = (lo.clone(), f64::INFINITY);
    let mut point = vec![0.0; dims];
    let total = per_axis.pow(dims as u32);
    for round in 0..60 {
        let n = if round == 0 { per_axis } else { 11 };
        let count = if round == 0 {
            total
        } else {
            n.pow(dims as u32)
        };
        for idx in 0..count {
            let mut rem = idx;
            for d in 0..dims {
                let k = rem % n;
                rem /= n;
                point[d] = lo[d] + width[d] * k as f64 / (n - 1) as f64;
            }
            let e = eval(&point);
            if e < best.1 {
                best = (point.clone(), e);
            }
        }
        for d in 0..dims {
            let cell = width[d] / (n - 1) as f64;
            width[d] = 4.0 * cell;
            lo[d] = best.0[d] - 2.0 * cell;
        }
    }
    best
}

/// The floor reported next to a fit of the given kind: the brute-forced
/// tropical floor for max-sum, the derivative-box floor for signed max-sum
/// (`[-1, 1]`) and max*-sum (`[0, 1]`), and zero for the universal kinds.
pub fn floor_for(kind: NodeKind, target: &TargetFunction, grid: &[f64]) -> f64 {
    match kind {
        NodeKind::MaxSum => tropical_floor(target, grid).1,
        NodeKind::SignedMaxSum => lower_bound_floor(target, (-1.0, 1.0), grid),
        NodeKind::MaxStarSum(_) => lower_bound_floor(target, (0.0, 1.0), grid),
        NodeKind::SumProduct(_) | NodeKind::Lns(_) => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchTrace {
    pub initial_error: f64,
    pub evaluations: usize,
    pub accepted: usize,
    pub restarts: usize,
}

/// Norm minimized by each restart: mean-square, then an 8-norm, then the
/// sup-norm itself. The smoother norms pull the search out of the many
/// corners of the sup-norm landscape; the result is always the best
/// sup-norm point seen.
const STAGE_NORMS: [Option<i32>; RESTARTS] = [Some(2), Some(8), None];

fn stage_value(abs_err: &[f64], norm: Option<i32>) -> f64 {
    match norm {
        None => abs_err.iter().copied().fold(0.0, f64::max),
        Some(p) => {
            let mean = abs_err.iter().map(|e| e.powi(p)).sum::<f64>() / abs_err.len() as f64;
            mean.powf(1.0 / p as f64)
        }
    }
}

/// Minimizes the sup of `abs_residuals` from `start`. Each move perturbs
/// either one random coordinate or every coordinate, with a step that decays
/// geometrically over each restart; successful moves are repeated with
/// doubled length while they keep improving. `budget` counts evaluations
/// after the initial one.
pub fn local_search(
    start: &[f64],
    abs_residuals: &dyn Fn(&[f64]) -> Vec<f64>,
    budget: usize,
    seed: u64,
) -> (Vec<f64>, f64, SearchTrace) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sup = |r: &[f64]| stage_value(r, None);
    let mut best_sup_point = start.to_vec();
    let mut best_sup = sup(&abs_residuals(start));
    let mut trace = SearchTrace {
        initial_error: best_sup,
        evaluations: 0,
        accepted: 0,
        restarts: RESTARTS,
    };
    let n = start.len();
    if n == 0 {
        return (best_sup_point, best_sup, trace);
    }
    let per_restart = budget.div_ceil(RESTARTS).max(1);
    let decay = (FINAL_STEP / INITIAL_STEP).powf(1.0 / per_restart as f64);
    let dir_scale = 1.0 / (n as f64).sqrt();
    let mut dir = vec![0.0; n];
    let mut cur = start.to_vec();
    let mut cand = cur.clone();
    for norm in STAGE_NORMS {
        let mut step = INITIAL_STEP;
        let mut cur_val = stage_value(&abs_residuals(&cur), norm);
        for _ in 0..per_restart {
            if trace.evaluations >= budget {
                break;
            }
            // one coordinate, every coordinate independently, or every
            // coordinate by the same amount (moves a whole max-sum net down)
            dir.iter_mut().for_each(|d| *d = 0.0);
            let kind: f64 = rng.gen();
            if kind < 0.45 {
                dir[rng.gen_range(0..n)] = step * rng.gen_range(-1.0..=1.0);
            } else if kind < 0.9 {
                for d in dir.iter_mut() {
                    *d = step * dir_scale * rng.gen_range(-1.0..=1.0);
                }
            } else {
                let shift = step * dir_scale * rng.gen_range(-1.0..=1.0);
                dir.iter_mut().for_each(|d| *d = shift);
            }
            step *= decay;
            loop {
                for ((c, b), d) in cand.iter_mut().zip(&cur).zip(&dir) {
                    *c = b + d;
                }
                let res = abs_residuals(&cand);
                trace.evaluations += 1;
                let s = sup(&res);
                if s < best_sup {
                    best_sup = s;
                    best_sup_point.copy_from_slice(&cand);
                }
                let v = stage_value(&res, norm);
                if v < cur_val {
                    cur_val = v;
                    cur.copy_from_slice(&cand);
                    trace.accepted += 1;
                    dir.iter_mut().for_each(|d| *d *= 2.0);
                    if trace.evaluations < budget {
                        continue;
                    }
                }
                break;
            }
        }
        // later stages continue from the best sup-norm point
        cur.copy_from_slice(&best_sup_point);
    }
    (best_sup_point, best_sup, trace)
}

fn abs_residuals(net: &NetworkSpec, target: &TargetFunction, grid: &[f64]) -> Vec<f64> {
    let ev = Evaluator::new(net);
    grid.iter()
        .map(|&x| (ev.eval(x) - target.eval(x)).abs())
        .collect()
}

/// Outcome of one fit. `sup_error` is exactly `sup_error(&net, ...)` on the
/// stored network and grid.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxReport {
    pub target: String,
    pub node_kind: String,
    pub depth: usize,
    pub widths: Vec<usize>,
    pub seed: u64,
    pub budget: usize,
    pub net: NetworkSpec,
    pub sup_error: f64,
    pub floor: f64,
    pub grid_size: usize,
    pub trace: SearchTrace,
}

impl ApproxReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "target",
        "node_kind",
        "depth",
        "widths",
        "seed",
        "sup_error",
        "floor",
        "budget",
    ];

    pub fn csv_record(&self) -> [String; 8] {
        let widths: Vec<String> = self.widths.iter().map(usize::to_string).collect();
        [
            self.target.clone(),
            self.node_kind.clone(),
            self.depth.to_string(),
            widths.join(";"),
            self.seed.to_string(),
            format!("{:e}", self.sup_error),
            format!("{:e}", self.floor),
            self.budget.to_string(),
        ]
    }

    /// `(x, h(x), net(x))` over the report's grid.
    pub fn plot_rows(&self, target: &TargetFunction) -> Vec<[f64; 3]> {
        let ev = Evaluator::new(&self.net);
        target
            .grid(self.grid_size)
            .into_iter()
            .map(|x| [x, target.eval(x), ev.eval(x)])
            .collect()
    }
}

/// Fits the weights and biases of `net0` (signs stay fixed) to the target
/// on a [`DEFAULT_GRID`]-point grid.
pub fn fit(net0: &NetworkSpec, target: &TargetFunction, budget: usize, seed: u64) -> ApproxReport {
    fit_on_grid(net0, target, budget, seed, DEFAULT_GRID)
}

pub fn fit_on_grid(
    net0: &NetworkSpec,
    target: &TargetFunction,
    budget: usize,
    seed: u64,
    grid_size: usize,
) -> ApproxReport {
    let grid = target.grid(grid_size);
    let residuals = |p: &[f64]| abs_residuals(&net0.with_params(p), target, &grid);
    let (params, _, trace) = local_search(&net0.params(), &residuals, budget, seed);
    let net = net0.with_params(&params);
    let sup = sup_error(&net, target, &grid);
    ApproxReport {
        target: target.id.name().to_string(),
        node_kind: net.node_kind().name().to_string(),
        depth: net.depth(),
        widths: net.hidden_widths(),
        seed,
        budget,
        floor: floor_for(net.node_kind(), target, &grid),
        sup_error: sup,
        grid_size,
        net,
        trace,
    }
}

/// Fits `max(w0, w1 + x)` directly with the same search.
pub fn fit_tropical(
    target: &TargetFunction,
    budget: usize,
    seed: u64,
    grid_size: usize,
) -> (TropicalAffineForm, f64) {
    let grid = target.grid(grid_size);
    let residuals = |p: &[f64]| {
        let form = TropicalAffineForm::new(p[0], p[1]);
        grid.iter()
            .map(|&x| (form.eval(x) - target.eval(x)).abs())
            .collect()
    };
    let (p, err, _) = local_search(&[0.0, 0.0], &residuals, budget, seed);
    (TropicalAffineForm::new(p[0], p[1]), err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;
    use crate::network::random_network;

    fn grid(t: &TargetFunction) -> Vec<f64> {
        t.grid(DEFAULT_GRID)
    }

    // brute force over all grid pairs, independent of the running-minimum form
    fn pair_floor(t: &TargetFunction, (a, b): (f64, f64), g: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for (i, &c) in g.iter().enumerate() {
            for &d in &g[i + 1..] {
                let dh = t.eval(d) - t.eval(c);
                best = best
                    .max((dh - b * (d - c)) / 2.0)
                    .max((a * (d - c) - dh) / 2.0);
            }
        }
        best
    }

    #[test]
    fn floor_examples() {
        let unit = (0.0, 1.0);
        let double = TargetFunction::builtin(TargetId::Double);
        assert!((lower_bound_floor(&double, unit, &grid(&double)) - 0.5).abs() < 1e-12);
        let half = TargetFunction::builtin(TargetId::HalfSlope);
        assert_eq!(lower_bound_floor(&half, unit, &grid(&half)), 0.0);
        let neg = TargetFunction::builtin(TargetId::Neg);
        assert!((lower_bound_floor(&neg, unit, &grid(&neg)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn floor_matches_pair_enumeration() {
        for id in TargetId::ALL {
            let t = TargetFunction::builtin(id);
            let g = t.grid(128);
            for bx in [(0.0, 1.0), (-1.0, 1.0), (0.0, 0.5)] {
                let fast = lower_bound_floor(&t, bx, &g);
                let slow = pair_floor(&t, bx, &g);
                assert!((fast - slow).abs() < 1e-12, "{id} {bx:?}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn grid_endpoints() {
        let t = TargetFunction::builtin(TargetId::Square);
        let g = t.grid(512);
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[511], 1.0);
    }

    #[test]
    fn tropical_floor_for_square() {
        // over the 512 grid the best line misses x - x² at 255/511 and 256/511
        let t = TargetFunction::builtin(TargetId::Square);
        let (_, e) = tropical_floor(&t, &grid(&t));
        let frozen = 32640.0 / 261121.0;
        assert!((e - frozen).abs() < 1e-9, "{e}");
    }

    #[test]
    fn target_names() {
        for id in TargetId::ALL {
            assert_eq!(id.name().parse::<TargetId>().unwrap(), id);
        }
        let err = "cube".parse::<TargetId>().unwrap_err();
        assert!(err.contains("square") && err.contains("sinewave"));
    }

    #[test]
    fn search_is_deterministic_and_monotone() {
        let t = TargetFunction::builtin(TargetId::Square);
        let net = random_network(NodeKind::SumProduct(ActivationKind::Relu), 1, &[4], 2).unwrap();
        let a = fit_on_grid(&net, &t, 300, 5, 64);
        let b = fit_on_grid(&net, &t, 300, 5, 64);
        assert_eq!(a.sup_error.to_bits(), b.sup_error.to_bits());
        assert_eq!(a.net, b.net);
        assert!(a.sup_error <= a.trace.initial_error);
        assert_eq!(a.trace.evaluations, 300);
        assert_eq!(a.sup_error, sup_error(&a.net, &t, &t.grid(64)));
    }

    #[test]
    fn csv_record_shape() {
        let t = TargetFunction::builtin(TargetId::Double);
        let net =
            random_network(NodeKind::MaxStarSum(ActivationKind::Relu), 2, &[3, 2], 1).unwrap();
        let r = fit_on_grid(&net, &t, 30, 1, 32);
        let rec = r.csv_record();
        assert_eq!(rec[0], "double");
        assert_eq!(rec[1], "max-star-sum");
        assert_eq!(rec[3], "3;2");
        assert_eq!(r.plot_rows(&t).len(), 32);
    }
}
