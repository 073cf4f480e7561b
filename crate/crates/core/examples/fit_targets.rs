//! Fit each node family to the built-in targets and compare the achieved
//! sup-norm error with the family's floor.

use morphnet::approx::{fit, TargetFunction, TargetId};
use morphnet::{random_network, ActivationKind, NodeKind};

fn main() -> Result<(), morphnet::SpecError> {
    let relu = ActivationKind::Relu;
    let runs = [
        (
            NodeKind::SumProduct(relu),
            vec![16],
            TargetId::Square,
            20_000,
        ),
        (NodeKind::MaxSum, vec![4, 4], TargetId::Square, 20_000),
        (NodeKind::MaxStarSum(relu), vec![8], TargetId::Double, 5_000),
        (
            NodeKind::SignedMaxSum,
            vec![4, 4],
            TargetId::HalfSlope,
            5_000,
        ),
        (
            NodeKind::SumProduct(relu),
            vec![32],
            TargetId::SineWave,
            50_000,
        ),
    ];
    println!(
        "{:<20} {:<10} {:>12} {:>12}",
        "kind", "target", "sup_error", "floor"
    );
    for (kind, widths, id, budget) in runs {
        let target = TargetFunction::builtin(id);
        let net0 = random_network(kind, widths.len(), &widths, 0)?;
        let r = fit(&net0, &target, budget, 0);
        println!(
            "{:<20} {:<10} {:>12.6} {:>12.6}",
            kind.to_string(),
            id.name(),
            r.sup_error,
            r.floor
        );
    }
    Ok(())
}
