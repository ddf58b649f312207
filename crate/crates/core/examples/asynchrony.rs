//! Convergence rate with a growing number of slow agents that finish their
//! local update only half of the time.
//!
//! cargo run --release --example asynchrony

use dot_admm::experiment::{asynchrony_experiment, Scenario};

fn main() -> dot_admm::Result<()> {
    let mut base = Scenario::desk_logistic();
    base.trials = 50;
    base.horizon = 600;
    let result = asynchrony_experiment(&base, &[0, 2, 5, 8, 10], 0.5, 1.0)?;
    println!("{:>11}  {:>9}  {:>14}", "slow agents", "rate", "fit window");
    for p in &result.points {
        match &p.rate {
            Some(fit) => println!(
                "{:>11}  {:>9.4}  {:>14}",
                p.value,
                fit.rate,
                format!("{:?}", fit.window)
            ),
            None => println!("{:>11}  {:>9}", p.value, "n/a"),
        }
    }
    Ok(())
}
