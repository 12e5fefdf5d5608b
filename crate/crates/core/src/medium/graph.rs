use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MediumError;

/// Reciprocal hearing relation between nodes. Node positions are kept for
/// reporting only; adjacency does not depend on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityGraph {
    node_count: usize,
    adjacency: Vec<Vec<bool>>,
    flow_pairs: Vec<(usize, usize)>,
    positions: Vec<(f64, f64)>,
}

impl ConnectivityGraph {
    /// Single collision domain: everyone hears everyone.
    pub fn complete(node_count: usize) -> Self {
        let adjacency = (0..node_count)
            .map(|i| (0..node_count).map(|j| i != j).collect())
            .collect();
        Self {
            node_count,
            adjacency,
            flow_pairs: Vec::new(),
            positions: vec![(0.0, 0.0); node_count],
        }
    }

    /// Builds a graph from explicit undirected edges; flow pairs are added
    /// as edges.
    pub fn from_edges(
        node_count: usize,
        edges: &[(usize, usize)],
        flow_pairs: &[(usize, usize)],
    ) -> Result<Self, MediumError> {
        let mut adjacency = vec![vec![false; node_count]; node_count];
        for &(a, b) in edges.iter().chain(flow_pairs) {
            if a >= node_count || b >= node_count || a == b {
                return Err(MediumError::InvalidSetup(format!(
                    "edge ({a}, {b}) invalid for {node_count} nodes"
                )));
            }
            adjacency[a][b] = true;
            adjacency[b][a] = true;
        }
        Ok(Self {
            node_count,
            adjacency,
            flow_pairs: flow_pairs.to_vec(),
            positions: vec![(0.0, 0.0); node_count],
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn flow_pairs(&self) -> &[(usize, usize)] {
        &self.flow_pairs
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adjacency[a].iter().filter(|&&x| x).count()
    }

    pub fn is_complete(&self) -> bool {
        (0..self.node_count).all(|a| self.degree(a) + 1 == self.node_count)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.node_count)
            .all(|a| (0..self.node_count).all(|b| self.adjacency[a][b] == self.adjacency[b][a]))
    }
}

/// `node_count / 2` flow pairs `(2i, 2i + 1)`, always adjacent; every other
/// unordered pair is adjacent with probability `gamma`.
pub fn random_topology<R: Rng + ?Sized>(
    node_count: usize,
    gamma: f64,
    area_m: f64,
    rng: &mut R,
) -> Result<ConnectivityGraph, MediumError> {
    if node_count % 2 != 0 {
        return Err(MediumError::InvalidSetup(format!(
            "random topology needs an even node count, got {node_count}"
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(MediumError::InvalidSetup(format!(
            "gamma = {gamma} outside [0, 1]"
        )));
    }
    let positions = (0..node_count)
        .map(|_| (rng.gen::<f64>() * area_m, rng.gen::<f64>() * area_m))
        .collect();
    let flow_pairs: Vec<(usize, usize)> = (0..node_count / 2).map(|i| (2 * i, 2 * i + 1)).collect();
    let mut adjacency = vec![vec![false; node_count]; node_count];
    for a in 0..node_count {
        for b in (a + 1)..node_count {
            let linked = (a % 2 == 0 && b == a + 1) || rng.gen_bool(gamma);
            adjacency[a][b] = linked;
            adjacency[b][a] = linked;
        }
    }
    Ok(ConnectivityGraph {
        node_count,
        adjacency,
        flow_pairs,
        positions,
    })
}
