use super::{ChainKind, DecisionChain, Transitions};
use crate::decision::{quorum_prob, DecisionParams};
use crate::error::{Error, Result};
use crate::network::Topology;

/// Largest network for which the `2^N`-state chain is built.
pub const EXACT_AGENT_CAP: usize = 14;

/// Chain over network-frame desire vectors `g` (bit `k` of the state index is
/// `g(k)`). Each agent keeps its desire with the quorum probability computed
/// over its neighborhood under `g`, independently of the others.
pub fn build_exact_chain(topology: &Topology, params: &DecisionParams) -> Result<DecisionChain> {
    params.validate()?;
    let n = topology.len();
    if n > EXACT_AGENT_CAP {
        return Err(Error::Capacity {
            requested: n,
            cap: EXACT_AGENT_CAP,
        });
    }
    let states = 1usize << n;
    let mut keep = vec![0.0; states * n];
    for g in 0..states {
        for k in 0..n {
            let gk = g >> k & 1;
            let nk = topology.neighbors(k);
            let n_g = nk.iter().filter(|&&l| g >> l & 1 == gk).count();
            keep[g * n + k] = quorum_prob(n_g, nk.len(), params.k, params.beta[gk]);
        }
    }
    Ok(DecisionChain {
        kind: ChainKind::Exact,
        agents: n,
        k: params.k,
        transitions: Transitions::Product { agents: n, keep },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_chain_by_hand() {
        let t = Topology::complete(2).unwrap();
        for k in [1, 3] {
            let c = build_exact_chain(&t, &DecisionParams::with_k(k)).unwrap();
            // state 0b01: agent 0 wants 1, agent 1 wants 0, each keeps w.p. 1/2
            for j in 0..4 {
                assert!((c.transition_prob(0b01, j) - 0.25).abs() < 1e-15);
            }
            assert_eq!(c.transition_prob(0, 0), 1.0);
            assert_eq!(c.transition_prob(3, 3), 1.0);
        }
    }

    #[test]
    fn rows_are_stochastic() {
        let t = Topology::path(5).unwrap();
        let c = build_exact_chain(&t, &DecisionParams::with_k(2)).unwrap();
        let p = c.dense().unwrap();
        for i in 0..p.nrows() {
            assert!((p.row(i).sum() - 1.0).abs() < 1e-12);
        }
        assert_eq!(c.absorbing_states(), vec![0, 31]);
    }

    #[test]
    fn capacity_cap() {
        let t = Topology::path(15).unwrap();
        assert!(matches!(
            build_exact_chain(&t, &DecisionParams::default()),
            Err(Error::Capacity { requested: 15, cap: 14 })
        ));
    }
}
