//! Compares the measured mean distance to the fixed-point set with the
//! analytical mean bound on a lossy, noisy network.
//!
//! cargo run --release --example theory_bound

use dot_admm::experiment::{PreparedScenario, Scenario};

fn main() -> dot_admm::Result<()> {
    let mut s = Scenario::desk_logistic();
    s.horizon = 400;
    s.trials = 50;
    s.channel.link_success = 0.5;
    s.channel.link_noise = 1e-4;
    s.channel.compute_noise = 1e-4;
    s.metrics.theory_bound = true;
    let prepared = PreparedScenario::new(s)?;
    let result = prepared.run()?;
    let theory = result.theory.as_ref().expect("bound requested");
    if let Some(est) = &theory.gamma_estimate {
        println!(
            "gamma estimate {:.3} from {} points ({} skipped)",
            est.gamma, est.used, est.skipped
        );
    }
    println!(
        "mu {:.5}, initial distance {:.3}, bound asymptote {:.3e}",
        theory.rate.mu,
        theory.initial_distance,
        theory.rate.asymptote()
    );
    println!("{:>5}  {:>12}  {:>12}", "tick", "distance", "bound");
    for m in result.mean.iter().filter(|m| m.k % 50 == 0) {
        println!(
            "{:>5}  {:>12.4e}  {:>12.4e}",
            m.k,
            m.fixed_point_distance.unwrap_or(f64::NAN),
            theory.bound[m.k]
        );
    }
    Ok(())
}
