use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const MAX_TOPOLOGY_ATTEMPTS: usize = 1000;

/// Undirected neighborhoods over `n` agents. Every neighborhood contains the
/// agent itself and is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TopologySpec", into = "TopologySpec")]
pub struct Topology {
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TopologySpec {
    agents: usize,
    neighbors: Vec<Vec<usize>>,
}

impl TryFrom<TopologySpec> for Topology {
    type Error = Error;

    fn try_from(spec: TopologySpec) -> Result<Self> {
        if spec.neighbors.len() != spec.agents {
            return Err(Error::DimensionMismatch {
                expected: spec.agents,
                found: spec.neighbors.len(),
            });
        }
        Topology::from_neighborhoods(spec.neighbors)
    }
}

impl From<Topology> for TopologySpec {
    fn from(t: Topology) -> Self {
        TopologySpec {
            agents: t.len(),
            neighbors: t.neighbors,
        }
    }
}

impl Topology {
    /// Builds a topology from explicit neighborhoods. Self-loops are added if
    /// missing; symmetry and connectivity are checked.
    pub fn from_neighborhoods(mut neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        if n == 0 {
            return invalid("topology needs at least one agent");
        }
        for (k, nk) in neighbors.iter_mut().enumerate() {
            if nk.iter().any(|&l| l >= n) {
                return invalid(format!("neighborhood of agent {k} references an unknown agent"));
            }
            nk.push(k);
            nk.sort_unstable();
            nk.dedup();
        }
        for (k, nk) in neighbors.iter().enumerate() {
            for &l in nk {
                if neighbors[l].binary_search(&k).is_err() {
                    return invalid(format!("neighborhoods are not symmetric ({l} in N_{k} only)"));
                }
            }
        }
        let t = Topology { neighbors };
        if !t.is_connected() {
            return Err(Error::NotConnected { attempts: 1 });
        }
        Ok(t)
    }

    /// Builds a topology from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a}, {b}) out of range for {n} agents"));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        Self::from_neighborhoods(neighbors)
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("topology needs at least one agent");
        }
        Ok(Topology {
            neighbors: (0..n).map(|_| (0..n).collect()).collect(),
        })
    }

    /// Star graph with agent 0 at the center.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|l| (0, l)).collect();
        Self::from_edges(n, &edges)
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|l| (l - 1, l)).collect();
        Self::from_edges(n, &edges)
    }

    /// Proximity graph over planar positions. Unlike the other constructors,
    /// the result may be disconnected: agents in motion can drift apart.
    pub fn proximity(positions: &[[f64; 2]], radius: f64) -> Self {
        let n = positions.len();
        let r2 = radius * radius;
        let neighbors = (0..n)
            .map(|k| {
                (0..n)
                    .filter(|&l| {
                        let dx = positions[l][0] - positions[k][0];
                        let dy = positions[l][1] - positions[k][1];
                        l == k || dx * dx + dy * dy <= r2
                    })
                    .collect()
            })
            .collect();
        Topology { neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Neighborhood of `k`, including `k`.
    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    /// Neighborhood size `n_k` (counts `k` itself).
    pub fn degree(&self, k: usize) -> usize {
        self.neighbors[k].len()
    }

    pub fn contains(&self, k: usize, l: usize) -> bool {
        self.neighbors[k].binary_search(&l).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        self.neighbors.iter().all(|nk| nk.len() == self.len())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for &l in &self.neighbors[k] {
                if !seen[l] {
                    seen[l] = true;
                    count += 1;
                    queue.push_back(l);
                }
            }
        }
        count == n
    }

    /// Average neighborhood size excluding self-loops.
    pub fn mean_degree(&self) -> f64 {
        let total: usize = self.neighbors.iter().map(|nk| nk.len() - 1).sum();
        total as f64 / self.len() as f64
    }
}

/// Erdős–Rényi graph with edge probability `mean_degree / (n - 1)`, redrawn
/// until connected.
pub fn generate_topology<R: Rng + ?Sized>(n: usize, mean_degree: f64, rng: &mut R) -> Result<Topology> {
    if n < 2 {
        return invalid(format!("need at least 2 agents, got {n}"));
    }
    if !(mean_degree >= 2.0) {
        return invalid(format!("mean degree must be at least 2, got {mean_degree}"));
    }
    let p = (mean_degree / (n - 1) as f64).min(1.0);
    for _ in 0..MAX_TOPOLOGY_ATTEMPTS {
        let mut neighbors: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
        for k in 0..n {
            for l in (k + 1)..n {
                if rng.random::<f64>() < p {
                    neighbors[k].push(l);
                    neighbors[l].push(k);
                }
            }
        }
        for nk in &mut neighbors {
            nk.sort_unstable();
        }
        let t = Topology { neighbors };
        if t.is_connected() {
            return Ok(t);
        }
    }
    Err(Error::NotConnected {
        attempts: MAX_TOPOLOGY_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_agents_always_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = generate_topology(2, 2.0, &mut rng).unwrap();
        assert_eq!(t.neighbors(0), &[0, 1]);
        assert_eq!(t.neighbors(1), &[0, 1]);
    }

    #[test]
    fn forty_agents_connected_with_self_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = generate_topology(40, 5.0, &mut rng).unwrap();
        assert!(t.is_connected());
        for k in 0..40 {
            assert!(t.contains(k, k));
            assert!(t.degree(k) >= 2);
            for &l in t.neighbors(k) {
                assert!(t.contains(l, k));
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = generate_topology(30, 4.0, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = generate_topology(30, 4.0, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn complete_three() {
        let t = Topology::complete(3).unwrap();
        assert!((0..3).all(|k| t.degree(k) == 3));
    }

    #[test]
    fn too_sparse_fails() {
        // a degree-2 request on 400 agents is essentially never connected
        let err = generate_topology(400, 2.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap_err();
        assert!(matches!(err, Error::NotConnected { .. }));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(generate_topology(1, 3.0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
        assert!(generate_topology(5, 1.5, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
        assert!(Topology::from_neighborhoods(vec![vec![1], vec![]]).is_err());
        assert!(matches!(
            Topology::from_edges(3, &[(0, 1)]),
            Err(Error::NotConnected { .. })
        ));
    }

    #[test]
    fn json_roundtrip() {
        let t = Topology::path(4).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: Topology = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
        assert!(serde_json::from_str::<Topology>(r#"{"agents":2,"neighbors":[[0],[1]]}"#).is_err());
    }
}
