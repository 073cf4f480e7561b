//! Signed max-sum networks: a three-term canonical form when it exists,
//! and a network that has none.

use morphnet::canonicalize::{canonicalize_signed_max_sum, CanonError};
use morphnet::network::LayerSpec;
use morphnet::{evaluate, NetworkSpec, NodeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let abs = NetworkSpec::from_json(include_str!("data/abs_signed.json"))?;
    let f = canonicalize_signed_max_sum(&abs)?;
    println!("|x| net -> c1={:?} c2={:?} c3={:?}", f.c1(), f.c2(), f.c3());
    for x in [-3.0, -0.5, 0.0, 2.0] {
        println!(
            "  x={x:>5}: net {:>5}  form {:>5}",
            evaluate(&abs, x),
            f.eval(x)
        );
    }

    // negating a hinge gives min(0, -x): concave, so no max of the three terms fits it
    let hinge = LayerSpec {
        weights: vec![vec![0.0]],
        biases: vec![0.0],
        signs: Some(vec![vec![1.0]]),
    };
    let negate = LayerSpec {
        weights: vec![vec![0.0]],
        biases: vec![-100.0],
        signs: Some(vec![vec![-1.0]]),
    };
    let net = NetworkSpec::new(NodeKind::SignedMaxSum, vec![hinge, negate])?;
    match canonicalize_signed_max_sum(&net) {
        Err(e @ CanonError::OutsideClassF { .. }) => println!("rejected: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    for x in [-2.0, 0.0, 2.0] {
        println!("  x={x:>4}: {}", evaluate(&net, x));
    }
    Ok(())
}
