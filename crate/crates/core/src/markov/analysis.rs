use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{boundary_sum_closed_form, build_meanfield_chain, lemma_f, ChainKind, DecisionChain, DENSE_STATE_LIMIT};
use crate::error::{invalid, Error, Result};
use crate::linalg::{is_irreducible, left_perron_vector, power_spectral_radius, spectral_radius};

const ITERATIVE_TOL: f64 = 1e-12;
const ITERATIVE_MAX: usize = 1_000_000;

/// Spectral radius of the transient block `Q` and, when `Q` is primitive,
/// the same quantity recovered as `1 - y^T (b + c)` from the left Perron
/// vector `y` and the one-step absorption probabilities `b + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub rho: f64,
    pub primitive: bool,
    pub identity_rho: Option<f64>,
    pub residual: Option<f64>,
}

fn split_states(chain: &DecisionChain) -> Result<(Vec<usize>, Vec<usize>)> {
    let transient = chain.transient_states();
    if transient.is_empty() {
        return invalid("chain has no transient states");
    }
    Ok((transient, chain.absorbing_states()))
}

fn transient_block(chain: &DecisionChain, transient: &[usize]) -> Result<DMatrix<f64>> {
    let p = chain.dense()?;
    Ok(p.select_rows(transient).select_columns(transient))
}

// y = Q x restricted to transient states, without materializing Q.
fn apply_q(chain: &DecisionChain, transient: &[usize], x: &DVector<f64>) -> DVector<f64> {
    let mut full = vec![0.0; chain.num_states()];
    for (idx, &s) in transient.iter().enumerate() {
        full[s] = x[idx];
    }
    let out: Vec<f64> = transient
        .par_iter()
        .map(|&s| chain.row(s).iter().zip(&full).map(|(p, v)| p * v).sum())
        .collect();
    DVector::from_vec(out)
}

pub fn transient_spectral_radius(chain: &DecisionChain) -> Result<SpectralReport> {
    let (transient, absorbing) = split_states(chain)?;
    if chain.num_states() > DENSE_STATE_LIMIT {
        let rho = power_spectral_radius(|x| apply_q(chain, &transient, x), transient.len())?;
        return Ok(SpectralReport {
            rho,
            primitive: false,
            identity_rho: None,
            residual: None,
        });
    }
    let q = transient_block(chain, &transient)?;
    let rho = spectral_radius(&q)?;
    // irreducible with a positive diagonal implies primitive
    let primitive = is_irreducible(&q) && (0..q.nrows()).all(|i| q[(i, i)] > 0.0);
    if !primitive {
        return Ok(SpectralReport {
            rho,
            primitive,
            identity_rho: None,
            residual: None,
        });
    }
    let y = left_perron_vector(&q, rho)?;
    let bc = DVector::from_iterator(
        transient.len(),
        transient
            .iter()
            .map(|&s| absorbing.iter().map(|&a| chain.transition_prob(s, a)).sum::<f64>()),
    );
    let identity_rho = 1.0 - y.dot(&bc);
    Ok(SpectralReport {
        rho,
        primitive,
        identity_rho: Some(identity_rho),
        residual: Some((rho - identity_rho).abs()),
    })
}

// Solves (I - Q) x = rhs over transient states.
fn solve_fundamental(chain: &DecisionChain, transient: &[usize], rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if chain.num_states() <= DENSE_STATE_LIMIT {
        let q = transient_block(chain, transient)?;
        let m = DMatrix::identity(q.nrows(), q.nrows()) - q;
        return m
            .lu()
            .solve(rhs)
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Numerical("I - Q is singular".into()));
    }
    let mut x = rhs.clone();
    for _ in 0..ITERATIVE_MAX {
        let next = apply_q(chain, transient, &x) + rhs;
        let change = (&next - &x).amax();
        x = next;
        if change <= ITERATIVE_TOL * x.amax().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::Numerical("fundamental-matrix iteration did not converge".into()))
}

fn scatter(chain: &DecisionChain, transient: &[usize], x: &DVector<f64>, fill: impl Fn(usize) -> f64) -> DVector<f64> {
    let mut out = DVector::from_fn(chain.num_states(), |s, _| fill(s));
    for (idx, &s) in transient.iter().enumerate() {
        out[s] = x[idx];
    }
    out
}

/// Expected number of steps to absorption from every state, `(I - Q)^{-1} 1`
/// on transient states and zero on absorbing ones.
pub fn expected_absorption_times(chain: &DecisionChain) -> Result<DVector<f64>> {
    let (transient, _) = split_states(chain)?;
    let t = solve_fundamental(chain, &transient, &DVector::from_element(transient.len(), 1.0))?;
    Ok(scatter(chain, &transient, &t, |_| 0.0))
}

/// Probability of absorbing in the all-ones state from every state.
pub fn absorption_probabilities(chain: &DecisionChain) -> Result<DVector<f64>> {
    let (transient, _) = split_states(chain)?;
    let target = chain.all_ones_state();
    let rhs = DVector::from_iterator(transient.len(), transient.iter().map(|&s| chain.transition_prob(s, target)));
    let h = solve_fundamental(chain, &transient, &rhs)?;
    Ok(scatter(chain, &transient, &h, |s| f64::from(u8::from(s == target))))
}

/// Moments of the absorption time from one start state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionSummary {
    pub start: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub prob_all_ones: f64,
}

pub fn absorption_time_distribution(chain: &DecisionChain, start: usize) -> Result<AbsorptionSummary> {
    if start >= chain.num_states() {
        return invalid(format!("start state {start} out of range"));
    }
    if chain.is_absorbing(start) {
        return Ok(AbsorptionSummary {
            start,
            mean: 0.0,
            std_dev: 0.0,
            prob_all_ones: f64::from(u8::from(start == chain.all_ones_state())),
        });
    }
    let (transient, _) = split_states(chain)?;
    let ones = DVector::from_element(transient.len(), 1.0);
    let t = solve_fundamental(chain, &transient, &ones)?;
    // second moment s = (I - Q)^{-1} (1 + 2 Q t)
    let qt = &t - &ones;
    let s = solve_fundamental(chain, &transient, &(&ones + qt * 2.0))?;
    let idx = transient.binary_search(&start).expect("start is transient");
    let probs = absorption_probabilities(chain)?;
    Ok(AbsorptionSummary {
        start,
        mean: t[idx],
        std_dev: (s[idx] - t[idx] * t[idx]).max(0.0).sqrt(),
        prob_all_ones: probs[start],
    })
}

/// Monte Carlo absorption statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedAbsorption {
    pub trials: usize,
    pub mean: f64,
    pub median: f64,
    pub frac_all_ones: f64,
    pub censored: usize,
}

pub fn simulate_absorption<R: Rng + ?Sized>(
    chain: &DecisionChain,
    start: usize,
    trials: usize,
    max_steps: usize,
    rng: &mut R,
) -> Result<SimulatedAbsorption> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let target = chain.all_ones_state();
    let mut times = Vec::with_capacity(trials);
    let (mut ones, mut censored) = (0usize, 0usize);
    for _ in 0..trials {
        let mut s = start;
        let mut steps = 0;
        while !chain.is_absorbing(s) && steps < max_steps {
            s = chain.sample_next(s, rng);
            steps += 1;
        }
        if chain.is_absorbing(s) {
            ones += usize::from(s == target);
            times.push(steps as f64);
        } else {
            censored += 1;
        }
    }
    times.sort_by(f64::total_cmp);
    let absorbed = times.len();
    Ok(SimulatedAbsorption {
        trials,
        mean: times.iter().sum::<f64>() / absorbed.max(1) as f64,
        median: if absorbed == 0 { f64::NAN } else { times[absorbed / 2] },
        frac_all_ones: ones as f64 / absorbed.max(1) as f64,
        censored,
    })
}

/// Lumps an exact chain by the number of agents desiring model 1. Returns
/// the averaged `(N+1) x (N+1)` matrix and the largest spread between
/// states sharing a count (zero when the chain is lumpable).
pub fn lump_by_count(chain: &DecisionChain) -> Result<(DMatrix<f64>, f64)> {
    if chain.kind != ChainKind::Exact {
        return invalid("only exact chains can be lumped");
    }
    let n = chain.agents;
    let mut sum = DMatrix::zeros(n + 1, n + 1);
    let mut lo = DMatrix::from_element(n + 1, n + 1, f64::INFINITY);
    let mut hi = DMatrix::from_element(n + 1, n + 1, f64::NEG_INFINITY);
    let mut members = vec![0usize; n + 1];
    for s in 0..chain.num_states() {
        let from = s.count_ones() as usize;
        members[from] += 1;
        let mut row = vec![0.0; n + 1];
        for (j, p) in chain.row(s).iter().enumerate() {
            row[j.count_ones() as usize] += p;
        }
        for (to, p) in row.into_iter().enumerate() {
            sum[(from, to)] += p;
            lo[(from, to)] = lo[(from, to)].min(p);
            hi[(from, to)] = hi[(from, to)].max(p);
        }
    }
    let mut spread: f64 = 0.0;
    for from in 0..=n {
        for to in 0..=n {
            sum[(from, to)] /= members[from] as f64;
            spread = spread.max(hi[(from, to)] - lo[(from, to)]);
        }
    }
    Ok((sum, spread))
}

/// Whether the chain has exactly two absorbing states and every transient
/// state can reach both of them.
pub fn absorbing_reachable(chain: &DecisionChain) -> Result<bool> {
    let n = chain.num_states();
    if n > DENSE_STATE_LIMIT {
        return Err(Error::Capacity {
            requested: n,
            cap: DENSE_STATE_LIMIT,
        });
    }
    let absorbing = chain.absorbing_states();
    if absorbing.len() != 2 {
        return Ok(false);
    }
    let mut preds = vec![Vec::new(); n];
    for s in 0..n {
        for t in chain.successors(s) {
            if t != s {
                preds[t].push(s);
            }
        }
    }
    for &a in &absorbing {
        let mut seen = vec![false; n];
        seen[a] = true;
        let mut queue = VecDeque::from([a]);
        while let Some(t) = queue.pop_front() {
            for &s in &preds[t] {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        if (0..n).any(|s| !chain.is_absorbing(s) && !seen[s]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One row of a mean-field sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: u32,
    pub rho_q: f64,
    /// Expected absorption time from the balanced start `floor(N/2)`.
    pub mean_absorption: f64,
    pub identity_residual: f64,
    pub boundary_residual: f64,
}

/// Mean-field sweep over `K = 1..=k_max` together with checks of the
/// closed-form boundary sum and the scalar monotonicity lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub rows: Vec<SweepRow>,
    pub strictly_decreasing: bool,
    pub lemma_checked: usize,
    pub lemma_violations: usize,
}

pub fn verify_k_monotonicity(big_n: usize, k_max: u32) -> Result<MonotonicityReport> {
    if big_n <= 2 {
        return invalid(format!("rate monotonicity in K needs N > 2, got {big_n}"));
    }
    if k_max < 2 {
        return invalid("need at least two values of K");
    }
    let mut rows = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let chain = build_meanfield_chain(big_n, k)?;
        let spec = transient_spectral_radius(&chain)?;
        let times = expected_absorption_times(&chain)?;
        let p = chain.dense()?;
        let boundary_residual = (1..big_n)
            .map(|n| (p[(n, 0)] + p[(n, big_n)] - boundary_sum_closed_form(n, big_n, k)).abs())
            .fold(0.0, f64::max);
        rows.push(SweepRow {
            n: big_n,
            k,
            rho_q: spec.rho,
            mean_absorption: times[big_n / 2],
            identity_residual: spec.residual.unwrap_or(f64::NAN),
            boundary_residual,
        });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].rho_q < w[0].rho_q);
    let (lemma_checked, lemma_violations) = check_lemma_grid(big_n as f64);
    Ok(MonotonicityReport {
        rows,
        strictly_decreasing,
        lemma_checked,
        lemma_violations,
    })
}

// Checks f(x + h) >= f(x) on x >= 0, strictly when a != b and f is not
// numerically saturated at 1.
fn check_lemma_grid(big_n: f64) -> (usize, usize) {
    let values = [0.5, 1.0, 2.0, 3.0, 7.0];
    let (mut checked, mut bad) = (0, 0);
    for &a in &values {
        for &b in &values {
            for step in 0..40 {
                let x = step as f64 * 0.25;
                let (f0, f1) = (lemma_f(x, a, b, big_n), lemma_f(x + 0.25, a, b, big_n));
                checked += 1;
                let ok = if a == b {
                    (f1 - f0).abs() < 1e-14
                } else if f1 < 1.0 - 1e-9 {
                    f1 > f0
                } else {
                    f1 >= f0 - 1e-15
                };
                bad += usize::from(!ok);
            }
        }
    }
    (checked, bad)
}
