//! Drives the iteration by hand on a least-squares problem: build agents,
//! step them over a lossy channel and watch the local models approach the
//! centralized solution.
//!
//! cargo run --example manual_iteration

use std::sync::Arc;

use dot_admm::channel::ChannelModel;
use dot_admm::cost::{centralized_minimizer, CostFamily, DatasetGenerator, ProxConfig};
use dot_admm::engine::{step, AgentSystem, AlgorithmParams};
use dot_admm::topology::Topology;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dot_admm::Result<()> {
    let topology = Arc::new(Topology::random_connected(10, 20, 1)?);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let costs = DatasetGenerator {
        family: CostFamily::Linear,
        num_agents: 10,
        dim: 4,
        samples: 20,
        reg_weight: 0.0,
        label_noise: 1.0,
    }
    .generate(&mut rng)?;
    let x_star = centralized_minimizer(&costs)?;

    let params = AlgorithmParams::new(0.5, 10.0, ProxConfig::default())?;
    let completion = vec![1.0; 10];
    let channel = ChannelModel::from_agent_probabilities(&topology, &completion, 0.7, false)?;
    let mut sys = AgentSystem::new(Arc::clone(&topology), 4);

    for k in 1..=300 {
        let trace = step(&mut sys, &params, &costs, &channel, &mut rng)?;
        if k % 30 == 0 {
            let worst = (0..10)
                .map(|i| (sys.local_model(i) - &x_star).norm())
                .fold(0.0, f64::max);
            println!(
                "tick {k:>3}: {:>2} of {} packets delivered, worst agent error {worst:.3e}",
                trace.active_edges(),
                topology.num_edges()
            );
        }
    }
    println!("centralized solution {:.6?}", x_star.as_slice());
    println!("agent 0 model        {:.6?}", sys.local_model(0).as_slice());
    Ok(())
}
