//! Tracking a piecewise-constant sequence of problems. More frequent
//! switches leave less time to converge between them, so the time-averaged
//! error grows.
//!
//! cargo run --release --example online_tracking

use dot_admm::experiment::{online_experiment, Scenario};

fn main() -> dot_admm::Result<()> {
    let mut base = Scenario::desk_logistic();
    base.horizon = 5000;
    base.trials = 5;
    for result in online_experiment(&base, &[0, 10, 100])? {
        let fits = result.segment_fits();
        let slopes: Vec<f64> = fits.iter().flatten().map(|f| f.slope).collect();
        let steepest = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let shallowest = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{:>3} switches: time-averaged error {:.3e}, {} segments, log-error slopes in [{steepest:.3}, {shallowest:.3}]",
            result.switch_times.len(),
            result.time_average_error(),
            fits.len()
        );
    }
    Ok(())
}
