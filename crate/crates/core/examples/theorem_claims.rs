//! Run every named claim check at smoke scale and print the table.

use morphnet::claims::{render_table, run_all, Scale};

fn main() {
    let checks = run_all(7, Scale::Smoke);
    print!("{}", render_table(&checks));
    for c in checks.iter().filter(|c| !c.passed()) {
        println!("{}: {}", c.claim, c.evidence);
    }
}
