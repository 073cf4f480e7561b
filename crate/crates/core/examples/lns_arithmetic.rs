//! Signed log-domain arithmetic: products become sums of logs, sums go
//! through the smooth maximum.

use morphnet::signed_log::{lns_add, lns_mul, max_star, max_star_n};
use morphnet::SignedLogValue;

fn main() -> Result<(), morphnet::DomainError> {
    let a = SignedLogValue::from_linear(-3.0)?;
    let b = SignedLogValue::from_linear(0.25)?;
    println!("a = {a}, b = {b}");
    println!("a * b = {}", lns_mul(a, b).to_linear());
    println!("a + b = {}", lns_add(a, b).to_linear());

    // exact cancellation gives the canonical zero
    let z = lns_add(a, SignedLogValue::from_linear(3.0)?);
    println!("a + 3 is zero: {}", z.is_zero());

    // max* is ln(e^x + e^y), stable far from the origin
    println!("max*(1000, 999) = {}", max_star(1000.0, 999.0));
    println!(
        "max*(0, 0, 0) = {} (ln 3 = {})",
        max_star_n(&[0.0, 0.0, 0.0])?,
        3f64.ln()
    );

    // a positive dot product computed entirely in the log domain
    let xs: [f64; 3] = [0.5, 2.0, 7.0];
    let ws: [f64; 3] = [1.5, 0.1, 3.0];
    let logs: Vec<f64> = xs.iter().zip(&ws).map(|(x, w)| x.ln() + w.ln()).collect();
    let dot: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum();
    println!(
        "ln(x.w) = {} vs max* of log products = {}",
        dot.ln(),
        max_star_n(&logs)?
    );
    Ok(())
}
