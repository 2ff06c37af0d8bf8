use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::network::{CombinationMatrix, ObservedAssignment, Topology};

/// Lower clamp for decibel values.
pub const MSD_FLOOR_DB: f64 = -120.0;

/// `10 log10(x)`, clamped at [`MSD_FLOOR_DB`].
pub fn to_db(x: f64) -> f64 {
    if x <= 0.0 {
        MSD_FLOOR_DB
    } else {
        (10.0 * x.log10()).max(MSD_FLOOR_DB)
    }
}

/// Mean squared deviation of `estimates` from `target`, in linear units.
pub fn msd_linear(estimates: &[DVector<f64>], target: &DVector<f64>) -> f64 {
    let total: f64 = estimates.iter().map(|w| (target - w).norm_squared()).sum();
    total / estimates.len() as f64
}

/// Network mean-square deviation in dB.
pub fn msd(estimates: &[DVector<f64>], target: &DVector<f64>) -> f64 {
    to_db(msd_linear(estimates, target))
}

/// Ensemble average of linear curves, returned in dB.
pub fn ensemble_db(curves: &[&[f64]]) -> Vec<f64> {
    if curves.is_empty() {
        return Vec::new();
    }
    let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| to_db(curves.iter().map(|c| c[i]).sum::<f64>() / curves.len() as f64))
        .collect()
}

/// Average of the last `window` linear values, in dB.
pub fn steady_state_db(curve_linear: &[f64], window: usize) -> f64 {
    let w = window.clamp(1, curve_linear.len().max(1));
    let tail = &curve_linear[curve_linear.len().saturating_sub(w)..];
    to_db(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// First index at which a dB curve is at or below `level`.
pub fn first_crossing(curve_db: &[f64], level: f64) -> Option<usize> {
    curve_db.iter().position(|v| *v <= level)
}

/// First iteration after which every agent desires the same model for the
/// rest of the run, or `None` if the run ends without lasting agreement.
pub fn agreement_time(desires: &[Vec<u8>]) -> Option<usize> {
    let unanimous = |d: &Vec<u8>| d.iter().all(|&x| x == d[0]);
    let last = desires.last()?;
    if !unanimous(last) {
        return None;
    }
    let mut t = desires.len() - 1;
    while t > 0 && unanimous(&desires[t - 1]) && desires[t - 1][0] == last[0] {
        t -= 1;
    }
    Some(t)
}

/// Fraction of agents desiring the majority model.
pub fn agreement_fraction(desires: &[u8]) -> f64 {
    let ones = desires.iter().filter(|&&d| d == 1).count();
    ones.max(desires.len() - ones) as f64 / desires.len() as f64
}

/// Combination weights that route information from the agents observing `q`.
///
/// Agents that are informed or have informed neighbors spread weight
/// uniformly over those. Others spread it over their neighbors excluding
/// themselves; an isolated uninformed agent keeps weight one on itself.
/// Fails unless every agent can reach an informed one.
pub fn fast_weights(topology: &Topology, f: &ObservedAssignment, q: u8) -> Result<CombinationMatrix> {
    let n = topology.len();
    if f.len() != n {
        return invalid("assignment and topology sizes differ");
    }
    if q > 1 {
        return invalid(format!("model index {q} is not 0 or 1"));
    }
    check_reaches_informed(topology, f, q)?;
    let mut a = DMatrix::zeros(n, n);
    for k in 0..n {
        let nbrs = topology.neighbors(k);
        let informed: Vec<usize> = nbrs.iter().copied().filter(|&l| f.get(l) == q).collect();
        if !informed.is_empty() {
            let w = 1.0 / informed.len() as f64;
            for l in informed {
                a[(l, k)] = w;
            }
        } else if nbrs.len() > 1 {
            let w = 1.0 / (nbrs.len() - 1) as f64;
            for &l in nbrs.iter().filter(|&&l| l != k) {
                a[(l, k)] = w;
            }
        } else {
            a[(k, k)] = 1.0;
        }
    }
    CombinationMatrix::new(topology, a)
}

fn check_reaches_informed(topology: &Topology, f: &ObservedAssignment, q: u8) -> Result<()> {
    let n = topology.len();
    let mut reached: Vec<bool> = (0..n).map(|k| f.get(k) == q).collect();
    if !reached.iter().any(|r| *r) {
        return Err(Error::InvalidParameter(format!("no agent observes model {q}")));
    }
    let mut frontier: Vec<usize> = (0..n).filter(|&k| reached[k]).collect();
    while let Some(k) = frontier.pop() {
        for &l in topology.neighbors(k) {
            if !reached[l] {
                reached[l] = true;
                frontier.push(l);
            }
        }
    }
    if let Some(k) = reached.iter().position(|r| !r) {
        return invalid(format!("agent {k} has no path to an agent observing model {q}"));
    }
    Ok(())
}
