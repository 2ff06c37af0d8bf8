//! Markov chains over decision configurations: the exact chain over all
//! `2^N` network-frame desire vectors and the mean-field chain over the
//! number of agents desiring model 1.

mod analysis;
mod exact;
mod meanfield;

pub use analysis::{
    absorbing_reachable, absorption_probabilities, absorption_time_distribution, expected_absorption_times,
    lump_by_count, simulate_absorption, transient_spectral_radius, verify_k_monotonicity, AbsorptionSummary,
    MonotonicityReport, SimulatedAbsorption, SpectralReport, SweepRow,
};
pub use exact::{build_exact_chain, EXACT_AGENT_CAP};
pub use meanfield::{boundary_sum_closed_form, build_meanfield_chain, lemma_f, meanfield_keep_probability};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chains with at most this many states can be materialized densely.
pub const DENSE_STATE_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    Exact,
    MeanField,
}

/// Transition structure. Exact chains store, for each configuration, the
/// probability that each agent keeps its desire; agents decide
/// independently given the configuration, so rows are product measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transitions {
    Dense(DMatrix<f64>),
    Product { agents: usize, keep: Vec<f64> },
}

/// Right-stochastic chain with two absorbing states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionChain {
    pub kind: ChainKind,
    pub agents: usize,
    pub k: u32,
    pub transitions: Transitions,
}

impl DecisionChain {
    pub fn num_states(&self) -> usize {
        match &self.transitions {
            Transitions::Dense(p) => p.nrows(),
            Transitions::Product { agents, .. } => 1usize << agents,
        }
    }

    /// Probability of moving from state `i` to state `j`.
    pub fn transition_prob(&self, i: usize, j: usize) -> f64 {
        match &self.transitions {
            Transitions::Dense(p) => p[(i, j)],
            Transitions::Product { agents, keep } => {
                let row = &keep[i * agents..(i + 1) * agents];
                let diff = i ^ j;
                row.iter()
                    .enumerate()
                    .map(|(k, &q)| if diff >> k & 1 == 0 { q } else { 1.0 - q })
                    .product()
            }
        }
    }

    /// Full row `i` of `P`.
    pub fn row(&self, i: usize) -> DVector<f64> {
        match &self.transitions {
            Transitions::Dense(p) => p.row(i).transpose(),
            Transitions::Product { agents, keep } => {
                DVector::from_vec(product_row(i, &keep[i * agents..(i + 1) * agents]))
            }
        }
    }

    /// Dense transition matrix, if small enough.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        match &self.transitions {
            Transitions::Dense(p) => Ok(p.clone()),
            Transitions::Product { .. } => {
                let n = self.num_states();
                if n > DENSE_STATE_LIMIT {
                    return Err(Error::Capacity {
                        requested: n,
                        cap: DENSE_STATE_LIMIT,
                    });
                }
                let mut p = DMatrix::zeros(n, n);
                for i in 0..n {
                    p.set_row(i, &self.row(i).transpose());
                }
                Ok(p)
            }
        }
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.transition_prob(i, i) == 1.0
    }

    pub fn absorbing_states(&self) -> Vec<usize> {
        (0..self.num_states()).filter(|&i| self.is_absorbing(i)).collect()
    }

    pub fn transient_states(&self) -> Vec<usize> {
        (0..self.num_states()).filter(|&i| !self.is_absorbing(i)).collect()
    }

    /// The state in which every agent desires model 1.
    pub fn all_ones_state(&self) -> usize {
        match self.kind {
            ChainKind::Exact => self.num_states() - 1,
            ChainKind::MeanField => self.agents,
        }
    }

    /// States reachable from `i` in one step.
    pub fn successors(&self, i: usize) -> Vec<usize> {
        match &self.transitions {
            Transitions::Dense(p) => (0..p.ncols()).filter(|&j| p[(i, j)] > 0.0).collect(),
            Transitions::Product { agents, keep } => {
                let row = &keep[i * agents..(i + 1) * agents];
                let mut out = vec![i];
                for (k, &q) in row.iter().enumerate() {
                    let (stay, flip) = (q > 0.0, q < 1.0);
                    let len = out.len();
                    for idx in 0..len {
                        let s = out[idx];
                        if flip {
                            out.push(s ^ (1 << k));
                        }
                        if !stay {
                            out[idx] = s ^ (1 << k);
                        }
                    }
                }
                out.sort_unstable();
                out.dedup();
                out
            }
        }
    }

    /// Draws the next state.
    pub fn sample_next<R: rand::Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        match &self.transitions {
            Transitions::Dense(p) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut last = i;
                for j in 0..p.ncols() {
                    let w = p[(i, j)];
                    if w > 0.0 {
                        acc += w;
                        last = j;
                        if u < acc {
                            return j;
                        }
                    }
                }
                last
            }
            Transitions::Product { agents, keep } => {
                let row = &keep[i * agents..(i + 1) * agents];
                let mut next = i;
                for (k, &q) in row.iter().enumerate() {
                    if q < 1.0 && rng.random::<f64>() >= q {
                        next ^= 1 << k;
                    }
                }
                next
            }
        }
    }
}

// Product-measure row: bit k of the destination keeps bit k of `state` with
// probability keep[k].
fn product_row(state: usize, keep: &[f64]) -> Vec<f64> {
    let mut dist = vec![1.0];
    for (k, &q) in keep.iter().enumerate() {
        let cur = state >> k & 1;
        let (p0, p1) = if cur == 0 { (q, 1.0 - q) } else { (1.0 - q, q) };
        let mut next = Vec::with_capacity(dist.len() * 2);
        next.extend(dist.iter().map(|d| d * p0));
        next.extend(dist.iter().map(|d| d * p1));
        dist = next;
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_row_sums_to_one() {
        let row = product_row(0b101, &[0.3, 0.8, 0.5]);
        assert_eq!(row.len(), 8);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // staying put: all three keep
        assert!((row[0b101] - 0.3 * 0.8 * 0.5).abs() < 1e-15);
        // only agent 1 flips
        assert!((row[0b111] - 0.3 * 0.2 * 0.5).abs() < 1e-15);
    }
}
