//! Asymptotic error and inner-solver cost of the logistic prox as its
//! stopping threshold loosens.
//!
//! cargo run --release --example threshold_sweep

use dot_admm::experiment::{threshold_sweep, Scenario};

fn main() -> dot_admm::Result<()> {
    let mut base = Scenario::desk_logistic();
    base.trials = 5;
    let result = threshold_sweep(&base, &[1e-14, 1e-10, 1e-6, 1e-2])?;
    println!("{:>10}  {:>14}  {:>12}", "threshold", "asymptotic", "inner iters");
    for p in &result.points {
        println!(
            "{:>10.0e}  {:>14.3e}  {:>12.1}",
            p.value, p.asymptotic_error, p.mean_inner_iterations
        );
    }
    println!("strictly increasing: {}", result.is_strictly_increasing());
    Ok(())
}
