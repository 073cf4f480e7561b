//! Collapse a depth-3 max-sum network into a two-parameter form and check
//! it against direct evaluation.

use morphnet::canonicalize::{canonicalize_max_sum, reduce_pair};
use morphnet::{evaluate, NetworkSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = NetworkSpec::from_json(include_str!("data/max_sum_depth3.json"))?;
    let form = canonicalize_max_sum(&net)?;
    println!(
        "hidden widths {:?} -> max({}, {} + x)",
        net.hidden_widths(),
        form.w0,
        form.w1
    );

    let worst = (0..=1000)
        .map(|i| -20.0 + 0.04 * i as f64)
        .map(|x| (form.eval(x) - evaluate(&net, x)).abs())
        .fold(0.0, f64::max);
    println!("max deviation on [-20, 20]: {worst:e}");

    // the pairwise step behind the collapse
    let f = reduce_pair(0.0, 1.0, -1.0, 0.0);
    println!(
        "(0 + max(1, x)) v (-1 + max(0, x)) = max({}, {} + x)",
        f.w0, f.w1
    );
    Ok(())
}
