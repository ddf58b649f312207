//! Builds a random connected graph and checks the edge-space operators the
//! algorithm is written in.
//!
//! cargo run --example graph_operators

use dot_admm::topology::Topology;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dot_admm::Result<()> {
    let topology = Topology::random_connected(10, 20, 42)?;
    println!(
        "{} agents, {} undirected edges, {} directed edges including self-loops",
        topology.num_agents(),
        topology.undirected_edges().count(),
        topology.num_edges()
    );
    println!("degrees: {:?}", topology.degrees());
    println!("neighbors of agent 0: {:?}", topology.neighbors(0));

    let dim = 3;
    let ops = topology.operators(dim, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = DVector::from_fn(topology.num_agents() * dim, |_, _| rng.random_range(-1.0..1.0));
    let z = DVector::from_fn(topology.num_edges() * dim, |_, _| rng.random_range(-1.0..1.0));

    let adjoint_gap = (ops.apply_a(&x)?.dot(&z) - x.dot(&ops.apply_at(&z)?)).abs();
    let swap_twice = (ops.apply_p(&ops.apply_p(&z)?)? - &z).norm();
    println!("|<A x, z> - <x, A^T z>| = {adjoint_gap:.2e}");
    println!("|P P z - z|             = {swap_twice:.2e}");
    println!("|D A^T|                 = {:.4}", ops.dat_norm());
    Ok(())
}
