//! Quorum-response updates of each agent's desired model, kept in the
//! agent's own frame: `g = 1` means "the model I observe".

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::network::{ObservedAssignment, Topology};

/// Expresses neighbor `l`'s desire in agent `k`'s frame: unchanged when `l`
/// is believed to observe the same model as `k`, flipped otherwise.
pub fn translate_neighbor_g(g_l: u8, f_hat_kl: u8) -> u8 {
    if f_hat_kl == 1 {
        g_l
    } else {
        1 - g_l
    }
}

/// Number of entries in `g_neighbors` (self included) equal to `g_self`.
pub fn quorum_set_size(g_neighbors: &[u8], g_self: u8) -> usize {
    g_neighbors.iter().filter(|&&g| g == g_self).count()
}

/// Probability of keeping the current desire:
/// `(beta n_g)^K / ((beta n_g)^K + (n_k - n_g)^K)`.
pub fn quorum_prob(n_g: usize, n_k: usize, k: u32, beta: f64) -> f64 {
    debug_assert!(n_g >= 1 && n_g <= n_k);
    let agree = (beta * n_g as f64).powi(k as i32);
    let other = ((n_k - n_g) as f64).powi(k as i32);
    if agree == 0.0 && other == 0.0 {
        return 0.5;
    }
    agree / (agree + other)
}

/// Keeps `g_prev` with probability `q`, flips it otherwise.
pub fn decide<R: Rng + ?Sized>(g_prev: u8, q: f64, rng: &mut R) -> u8 {
    if q >= 1.0 || rng.random::<f64>() < q {
        g_prev
    } else {
        1 - g_prev
    }
}

/// Network-frame desired model of an agent observing `f_k` whose own-frame
/// desire is `g_self`.
pub fn global_desire(f_k: u8, g_self: u8) -> u8 {
    if g_self == 1 {
        f_k
    } else {
        1 - f_k
    }
}

/// Quorum exponent and per-model quality weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionParams {
    pub k: u32,
    /// Quality weight of each model in the network frame.
    pub beta: [f64; 2],
}

impl Default for DecisionParams {
    fn default() -> Self {
        DecisionParams { k: 4, beta: [1.0, 1.0] }
    }
}

impl DecisionParams {
    pub fn with_k(k: u32) -> Self {
        DecisionParams { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return invalid("quorum exponent K must be at least 1");
        }
        if self.beta.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return invalid(format!("quality weights must be positive, got {:?}", self.beta));
        }
        Ok(())
    }
}

/// Whether agent `k`'s local tables say that all of its neighbors want the
/// same model it does. `f_hat(l)` is `k`'s estimate for neighbor `l`.
pub fn locally_unanimous(g: &[u8], k: usize, neighbors: &[usize], f_hat: impl Fn(usize) -> u8) -> bool {
    neighbors
        .iter()
        .all(|&l| translate_neighbor_g(g[l], f_hat(l)) == g[k])
}

/// The decision process alone, driven by correct knowledge of who observes
/// which model. Agents update synchronously from the previous configuration.
#[derive(Debug, Clone)]
pub struct QuorumProcess {
    topology: Topology,
    f: ObservedAssignment,
    params: DecisionParams,
    g: Vec<u8>,
    scratch: Vec<u8>,
}

impl QuorumProcess {
    /// Starts with every agent desiring its own observed model.
    pub fn new(topology: Topology, f: ObservedAssignment, params: DecisionParams) -> Result<Self> {
        params.validate()?;
        if topology.len() != f.len() {
            return invalid("assignment and topology sizes differ");
        }
        let n = f.len();
        Ok(QuorumProcess {
            topology,
            f,
            params,
            g: vec![1; n],
            scratch: vec![0; n],
        })
    }

    /// Starts from a network-frame configuration.
    pub fn with_global(mut self, global: &[u8]) -> Self {
        for (k, &d) in global.iter().enumerate() {
            self.g[k] = u8::from(d == self.f.get(k));
        }
        self
    }

    pub fn local(&self) -> &[u8] {
        &self.g
    }

    pub fn global(&self) -> Vec<u8> {
        (0..self.g.len()).map(|k| global_desire(self.f.get(k), self.g[k])).collect()
    }

    /// Agreement decided from the local frames only.
    pub fn locally_agreed(&self) -> bool {
        (0..self.g.len()).all(|k| {
            locally_unanimous(&self.g, k, self.topology.neighbors(k), |l| u8::from(self.f.same(k, l)))
        })
    }

    pub fn globally_agreed(&self) -> bool {
        let g = self.global();
        g.iter().all(|&x| x == g[0])
    }

    /// Keep probability of agent `k` under the current configuration.
    pub fn keep_probability(&self, k: usize) -> f64 {
        let nk = self.topology.neighbors(k);
        let n_g = nk
            .iter()
            .filter(|&&l| translate_neighbor_g(self.g[l], u8::from(self.f.same(k, l))) == self.g[k])
            .count();
        let beta = self.params.beta[usize::from(global_desire(self.f.get(k), self.g[k]))];
        quorum_prob(n_g, nk.len(), self.params.k, beta)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for k in 0..self.g.len() {
            self.scratch[k] = decide(self.g[k], self.keep_probability(k), rng);
        }
        std::mem::swap(&mut self.g, &mut self.scratch);
    }

    /// Runs until agreement or `max_steps`; returns the step count at which
    /// agreement was first observed.
    pub fn run_to_agreement<R: Rng + ?Sized>(&mut self, max_steps: usize, rng: &mut R) -> Option<usize> {
        for i in 0..=max_steps {
            if self.globally_agreed() {
                return Some(i);
            }
            if i < max_steps {
                self.step(rng);
            }
        }
        None
    }
}
