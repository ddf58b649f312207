//! Error floor caused by quantizing every transmitted packet to a grid of
//! step delta. The floor scales roughly linearly with delta.
//!
//! cargo run --release --example quantization_sweep

use dot_admm::experiment::{quantization_sweep, Scenario};

fn main() -> dot_admm::Result<()> {
    let mut base = Scenario::desk_logistic();
    base.trials = 10;
    let result = quantization_sweep(&base, &[1e-4, 1e-3, 1e-2, 1e-1])?;
    println!("{:>8}  {:>12}  {:>10}", "delta", "asymptotic", "err/delta");
    for p in &result.points {
        println!(
            "{:>8.0e}  {:>12.3e}  {:>10.3}",
            p.value,
            p.asymptotic_error,
            p.asymptotic_error / p.value
        );
    }
    Ok(())
}
