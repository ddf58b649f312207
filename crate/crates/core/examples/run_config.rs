//! Loads a scenario file, runs it and writes `curve.csv`.
//!
//! cargo run --release --example run_config -- configs/static_logistic.cfg out

use std::path::PathBuf;

use dot_admm::config::load_scenario;
use dot_admm::experiment::run_scenario;
use dot_admm::report::save_curve;

fn main() -> dot_admm::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/static_linear.cfg"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));

    let scenario = load_scenario(&config)?;
    let result = run_scenario(&scenario)?;
    let path = save_curve(&out, &result)?;
    println!(
        "{}: final error {:.3e} after {} ticks, {} trials, wrote {}",
        result.name,
        result.final_error(),
        scenario.horizon,
        scenario.trials,
        path.display()
    );
    Ok(())
}
