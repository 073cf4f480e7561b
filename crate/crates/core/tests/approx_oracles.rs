use morphnet::activation::ClampedSlope;
use morphnet::approx::{
    fit, fit_tropical, lower_bound_floor, sup_error, tropical_floor, TargetFunction, TargetId,
    DEFAULT_GRID,
};
use morphnet::network::LayerSpec;
use morphnet::{random_network, ActivationKind, NetworkSpec, NodeKind};

/// Relu network interpolating x^2 at `knots + 1` equally spaced points.
fn interpolant(knots: usize) -> NetworkSpec {
    let h = 1.0 / knots as f64;
    let knee: Vec<f64> = (0..knots).map(|i| i as f64 * h).collect();
    // slope on [t_i, t_i + h] is t_i + t_{i+1} = (2i + 1) h
    let slopes: Vec<f64> = (0..knots).map(|i| (2 * i + 1) as f64 * h).collect();
    let mut out_w = vec![slopes[0]];
    out_w.extend(slopes.windows(2).map(|s| s[1] - s[0]));
    let hidden = LayerSpec {
        weights: vec![vec![1.0]; knots],
        biases: knee.iter().map(|t| -t).collect(),
        signs: None,
    };
    let output = LayerSpec {
        weights: vec![out_w],
        biases: vec![0.0],
        signs: None,
    };
    NetworkSpec::new(
        NodeKind::SumProduct(ActivationKind::Relu),
        vec![hidden, output],
    )
    .unwrap()
}

#[test]
fn piecewise_linear_interpolant_beats_threshold() {
    let t = TargetFunction::builtin(TargetId::Square);
    let net = interpolant(16);
    let err = sup_error(&net, &t, &t.grid(DEFAULT_GRID));
    // chord error of x^2 is h^2 / 4
    assert!(err < 0.02 && (err - 1.0 / 1024.0).abs() < 1e-4, "{err}");
}

#[test]
fn reported_error_is_reproducible_from_stored_net() {
    let t = TargetFunction::builtin(TargetId::SineWave);
    let net0 = random_network(
        NodeKind::SumProduct(ActivationKind::ClampedSlope(ClampedSlope::Tanh)),
        1,
        &[6],
        2,
    )
    .unwrap();
    let r = fit(&net0, &t, 300, 2);
    assert_eq!(sup_error(&r.net, &t, &t.grid(r.grid_size)), r.sup_error);
    let json = r.net.to_json();
    let back = NetworkSpec::from_json(&json).unwrap();
    assert_eq!(sup_error(&back, &t, &t.grid(r.grid_size)), r.sup_error);
}

#[test]
fn tropical_shortcut_matches_max_sum_fit() {
    let t = TargetFunction::builtin(TargetId::Square);
    let g = t.grid(DEFAULT_GRID);
    let (_, floor) = tropical_floor(&t, &g);
    let (_, direct) = fit_tropical(&t, 4000, 1, DEFAULT_GRID);
    let net0 = random_network(NodeKind::MaxSum, 2, &[4, 4], 1).unwrap();
    let r = fit(&net0, &t, 5000, 1);
    assert!(direct >= floor - 1e-12 && r.sup_error >= floor - 1e-6);
    assert!(
        (direct - r.sup_error).abs() < 1e-4,
        "{direct} vs {}",
        r.sup_error
    );
}

#[test]
fn every_bounded_family_respects_its_box_floor() {
    let relu = ActivationKind::Relu;
    let cases = [
        (NodeKind::MaxSum, (0.0, 1.0)),
        (NodeKind::SignedMaxSum, (-1.0, 1.0)),
        (NodeKind::MaxStarSum(relu), (0.0, 1.0)),
    ];
    for (kind, bx) in cases {
        for id in TargetId::ALL {
            let t = TargetFunction::builtin(id);
            let g = t.grid(DEFAULT_GRID);
            let floor = lower_bound_floor(&t, bx, &g);
            let net0 = random_network(kind, 1, &[6], 11).unwrap();
            let r = fit(&net0, &t, 1500, 11);
            assert!(
                r.sup_error >= floor - 1e-6,
                "{kind} on {}: {} < {floor}",
                id.name(),
                r.sup_error
            );
        }
    }
}
