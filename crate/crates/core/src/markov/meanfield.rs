use nalgebra::DMatrix;

use super::{ChainKind, DecisionChain, Transitions};
use crate::error::{invalid, Result};

/// Probability that an agent chooses model 1 when `n` of `big_n` agents
/// currently desire it: `n^K / (n^K + (N - n)^K)`.
pub fn meanfield_keep_probability(n: usize, big_n: usize, k: u32) -> f64 {
    let a = (n as f64).powi(k as i32);
    let b = ((big_n - n) as f64).powi(k as i32);
    a / (a + b)
}

/// `(N + 1)`-state chain over the number of agents desiring model 1, with
/// binomial transitions `p_{n,m} = C(N, m) q_n^m (1 - q_n)^(N - m)`.
///
/// On a complete graph this chain is the exact chain lumped by count.
pub fn build_meanfield_chain(big_n: usize, k: u32) -> Result<DecisionChain> {
    if big_n < 2 {
        return invalid(format!("mean-field chain needs N >= 2, got {big_n}"));
    }
    if k == 0 {
        return invalid("quorum exponent K must be at least 1");
    }
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=big_n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let s = big_n + 1;
    let mut p = DMatrix::zeros(s, s);
    p[(0, 0)] = 1.0;
    p[(big_n, big_n)] = 1.0;
    for n in 1..big_n {
        let q = meanfield_keep_probability(n, big_n, k);
        let (lq, l1q) = (q.ln(), (-q).ln_1p());
        for m in 0..=big_n {
            let ln_c = ln_fact[big_n] - ln_fact[m] - ln_fact[big_n - m];
            p[(n, m)] = (ln_c + m as f64 * lq + (big_n - m) as f64 * l1q).exp();
        }
    }
    Ok(DecisionChain {
        kind: ChainKind::MeanField,
        agents: big_n,
        k,
        transitions: Transitions::Dense(p),
    })
}

/// `f(x) = (a^{Nx} + b^{Nx}) / (a^x + b^x)^N`, evaluated through
/// `t = (a / b)^x` as `(t^N + 1) / (t + 1)^N`.
pub fn lemma_f(x: f64, a: f64, b: f64, big_n: f64) -> f64 {
    let ln_t = x * (a / b).ln();
    // fold so that t <= 1; f is invariant under t -> 1/t
    let t = (-ln_t.abs()).exp();
    (t.powf(big_n) + 1.0) / (t + 1.0).powf(big_n)
}

/// Probability of absorbing in one step from count `n`:
/// `(n^{NK} + (N-n)^{NK}) / (n^K + (N-n)^K)^N`.
pub fn boundary_sum_closed_form(n: usize, big_n: usize, k: u32) -> f64 {
    lemma_f(f64::from(k), n as f64, (big_n - n) as f64, big_n as f64)
}
