//! Build random networks of each kind, evaluate them and probe their
//! slopes away from kinks.

use morphnet::network::{finite_diff, random_network, DiffOrder, DEFAULT_STEP};
use morphnet::{evaluate, ActivationKind, NodeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let relu = ActivationKind::Relu;
    let kinds = [
        NodeKind::SumProduct(relu),
        NodeKind::MaxSum,
        NodeKind::SignedMaxSum,
        NodeKind::MaxStarSum(relu),
        NodeKind::Lns(relu),
    ];
    for kind in kinds {
        let net = random_network(kind, 2, &[4, 4], 1)?;
        let mut slopes = Vec::new();
        for i in 0..9 {
            let x = -4.0 + i as f64;
            let p = finite_diff(&net, x, DEFAULT_STEP, DiffOrder::First)?;
            if !p.near_kink {
                slopes.push(format!("{:.4}", p.value));
            }
        }
        println!(
            "{:<22} f(0) = {:>9.4}  slopes: {}",
            kind.to_string(),
            evaluate(&net, 0.0),
            slopes.join(" ")
        );
    }

    let net = random_network(NodeKind::SumProduct(relu), 1, &[3], 4)?;
    println!("\n{}", net.to_json());
    Ok(())
}
