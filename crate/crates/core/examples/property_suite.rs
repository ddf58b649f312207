//! Runs the randomized operator checks and shows that a subtly wrong prox
//! passes the affinity check but fails the oracle comparison.
//!
//! cargo run --release --example property_suite

use dot_admm::validate::{
    check_affinity_with, check_linear_prox_oracle_with, linear_prox_dropped_factor, run_suite, Level,
};

fn main() -> dot_admm::Result<()> {
    let report = run_suite(Level::Full, 1)?;
    print!("{report}");
    println!("all passed: {}", report.passed());

    println!("\nprox with a dropped factor:");
    println!("{}", check_affinity_with(linear_prox_dropped_factor, 100, 5)?);
    println!("{}", check_linear_prox_oracle_with(linear_prox_dropped_factor, 50, 6)?);
    Ok(())
}
