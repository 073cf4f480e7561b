//! The five single-node kernels on the same inputs.

use morphnet::nodes::{
    node_lns, node_max_star_sum, node_max_sum, node_signed_max_sum, node_sum_product,
};
use morphnet::{ActivationKind, SignedLogValue};

fn main() -> Result<(), morphnet::DomainError> {
    let x = [0.3, -1.2, 2.0];
    let w = [1.0, -0.5, 0.7];
    let signs = [1.0, -1.0, 1.0];
    let b = 0.1;
    let relu = ActivationKind::Relu;

    println!("sum-product    {}", node_sum_product(&x, &w, b, relu)?);
    println!("max-sum        {}", node_max_sum(&x, &w, b)?);
    println!("signed max-sum {}", node_signed_max_sum(&x, &w, &signs, b)?);
    println!("max*-sum       {}", node_max_star_sum(&x, &w, b, relu)?);

    let lx: Vec<_> = x
        .iter()
        .map(|&v| SignedLogValue::from_linear(v))
        .collect::<Result<_, _>>()?;
    let lw: Vec<_> = w
        .iter()
        .map(|&v| SignedLogValue::from_linear(v))
        .collect::<Result<_, _>>()?;
    let out = node_lns(&lx, &lw, SignedLogValue::from_linear(b)?, relu)?;
    println!("lns            {} (decoded from {out})", out.to_linear());
    Ok(())
}
