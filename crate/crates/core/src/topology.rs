//! Undirected communication graphs with self-loops and the linear operators
//! that act on agent-block and edge-block vectors.
//!
//! Every agent `i` owns one auxiliary block `z_ij` per neighbor `j`, including
//! itself. Those directed edges are indexed lexicographically by `(i, j)`, so
//! the blocks of agent `i` are contiguous and the incidence map is
//! `blkdiag(1_{η_1}, ..., 1_{η_n}) ⊗ I_p`.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    neighbors: Vec<Vec<usize>>,
    /// Edge index of the first block owned by each agent, plus a trailing `ξ`.
    offsets: Vec<usize>,
    /// `(receiver, neighbor)` per directed edge.
    edges: Vec<(usize, usize)>,
    /// Index of `(j, i)` for each edge `(i, j)`.
    reverse: Vec<usize>,
}

impl Topology {
    /// Builds a topology from undirected pairs; self-loops are added automatically.
    pub fn new(n: usize, undirected_edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a graph needs at least one agent"));
        }
        let mut sets: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for &(a, b) in undirected_edges {
            for index in [a, b] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if a == b || !sets[a].insert(b) {
                return Err(Error::DuplicateEdge(a, b));
            }
            sets[b].insert(a);
        }

        let neighbors: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        if !is_connected(&neighbors) {
            return Err(Error::DisconnectedGraph);
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut edges = Vec::new();
        for (i, ns) in neighbors.iter().enumerate() {
            offsets.push(edges.len());
            edges.extend(ns.iter().map(|&j| (i, j)));
        }
        offsets.push(edges.len());

        let mut topo = Topology {
            neighbors,
            offsets,
            edges,
            reverse: Vec::new(),
        };
        topo.reverse = (0..topo.edges.len())
            .map(|e| {
                let (i, j) = topo.edges[e];
                topo.edge_index(j, i).expect("neighbor sets are symmetric")
            })
            .collect();
        Ok(topo)
    }

    /// Random connected graph: a uniformly random spanning tree (via a Prüfer
    /// sequence) plus `m - (n - 1)` distinct extra edges.
    pub fn random_connected(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m + 1 < n || m > n * (n - 1) / 2 {
            return Err(Error::InfeasibleEdgeCount { n, m });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen: BTreeSet<(usize, usize)> = random_tree(n, &mut rng)
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();

        let mut candidates: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|e| !chosen.contains(e))
            .collect();
        let extra = m - (n - 1);
        let (picked, _) = candidates.partial_shuffle(&mut rng, extra);
        chosen.extend(picked.iter().copied());

        let edges: Vec<(usize, usize)> = chosen.into_iter().collect();
        Topology::new(n, &edges)
    }

    pub fn num_agents(&self) -> usize {
        self.neighbors.len()
    }

    /// Total number of directed edges `ξ = Σ η_i`, self-loops included.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `η_i = |N_i|`.
    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    /// Sorted neighbor set of agent `i`, which always contains `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let ns = self.neighbors.get(i)?;
        ns.binary_search(&j).ok().map(|pos| self.offsets[i] + pos)
    }

    /// `(receiver, neighbor)` for edge `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge indices owned by agent `i`, i.e. all `(i, j)` with `j ∈ N_i`.
    pub fn agent_edges(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Index of `(j, i)` for `e = (i, j)`; this is the permutation `Π`.
    pub fn reverse_edge(&self, e: usize) -> usize {
        self.reverse[e]
    }

    pub fn is_self_loop(&self, e: usize) -> bool {
        let (i, j) = self.edges[e];
        i == j
    }

    /// Undirected non-self edges `(i, j)` with `i < j`.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied().filter(|&(i, j)| i < j)
    }

    /// Operators for block dimension `dim` and penalty `rho`.
    pub fn operators(&self, dim: usize, rho: f64) -> IncidenceOperators<'_> {
        IncidenceOperators {
            topology: self,
            dim,
            rho,
        }
    }
}

fn is_connected(neighbors: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; neighbors.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for &j in &neighbors[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    match n {
        1 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = leaves.pop_first().expect("Prüfer decoding always has a leaf");
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let a = leaves.pop_first().expect("two leaves remain");
    let b = leaves.pop_first().expect("two leaves remain");
    edges.push((a, b));
    edges
}

/// Matrix-free action of `A = Λ ⊗ I_p`, `Aᵀ`, `P = Π ⊗ I_p` and
/// `D = blkdiag((ρ η_i)^{-1} I_p)`.
#[derive(Debug, Clone, Copy)]
pub struct IncidenceOperators<'a> {
    topology: &'a Topology,
    dim: usize,
    rho: f64,
}

impl IncidenceOperators<'_> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Agent blocks to edge blocks: `(A x)_{ij} = x_i`.
    pub fn apply_a(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.dim;
        check_dim(self.topology.num_agents() * p, x.len())?;
        let mut out = DVector::zeros(self.topology.num_edges() * p);
        for (e, &(i, _)) in self.topology.edges.iter().enumerate() {
            out.rows_mut(e * p, p).copy_from(&x.rows(i * p, p));
        }
        Ok(out)
    }

    /// Edge blocks to agent blocks: `(Aᵀ z)_i = Σ_{j ∈ N_i} z_ij`.
    pub fn apply_at(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.dim;
        check_dim(self.topology.num_edges() * p, z.len())?;
        let mut out = DVector::zeros(self.topology.num_agents() * p);
        for (e, &(i, _)) in self.topology.edges.iter().enumerate() {
            let mut block = out.rows_mut(i * p, p);
            block += z.rows(e * p, p);
        }
        Ok(out)
    }

    /// Swaps the blocks of `(i, j)` and `(j, i)`.
    pub fn apply_p(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.dim;
        check_dim(self.topology.num_edges() * p, z.len())?;
        let mut out = DVector::zeros(z.len());
        for (e, &r) in self.topology.reverse.iter().enumerate() {
            out.rows_mut(e * p, p).copy_from(&z.rows(r * p, p));
        }
        Ok(out)
    }

    /// Scales agent block `i` by `1 / (ρ η_i)`.
    pub fn apply_d(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.dim;
        check_dim(self.topology.num_agents() * p, x.len())?;
        let mut out = x.clone();
        for i in 0..self.topology.num_agents() {
            let scale = 1.0 / (self.rho * self.topology.degree(i) as f64);
            out.rows_mut(i * p, p).scale_mut(scale);
        }
        Ok(out)
    }

    /// Operator norm of `D Aᵀ`, i.e. `max_i 1 / (ρ √η_i)`.
    pub fn dat_norm(&self) -> f64 {
        (0..self.topology.num_agents())
            .map(|i| 1.0 / (self.rho * (self.topology.degree(i) as f64).sqrt()))
            .fold(0.0, f64::max)
    }
}
