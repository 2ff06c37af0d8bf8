//! Adapt-then-combine diffusion, the two-matrix modified combination, and
//! the mean-error analysis of both.

mod complexity;
mod mean_error;

pub use complexity::{per_iteration_cost, Cost};
pub use mean_error::{
    build_mean_error_system, check_stepsize_stability, convergence_rate, MeanErrorSystem, RateReport, Variant,
    Weights,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::network::{CombinationMatrix, ObservedAssignment, Topology};

/// Adaptation step: `psi = w + mu u (d - u^T w)`.
pub fn atc_adapt(w: &DVector<f64>, d: f64, u: &DVector<f64>, mu: f64) -> DVector<f64> {
    let err = d - u.dot(w);
    let mut psi = w.clone();
    psi.axpy(mu * err, u, 1.0);
    psi
}

/// Combination step over the nonzero entries of `a_col`.
pub fn atc_combine(psis: &[DVector<f64>], a_col: &[f64]) -> DVector<f64> {
    debug_assert_eq!(psis.len(), a_col.len());
    let mut w = DVector::zeros(psis[0].len());
    for (psi, &a) in psis.iter().zip(a_col) {
        if a != 0.0 {
            w.axpy(a, psi, 1.0);
        }
    }
    w
}

/// Combination that takes fresh intermediates from `a1`-weighted neighbors and
/// stale estimates from `a2`-weighted ones.
pub fn modified_combine(psis: &[DVector<f64>], w_prevs: &[DVector<f64>], a1_col: &[f64], a2_col: &[f64]) -> DVector<f64> {
    debug_assert!(psis.len() == w_prevs.len() && a1_col.len() == psis.len() && a2_col.len() == psis.len());
    let mut w = DVector::zeros(psis[0].len());
    for l in 0..psis.len() {
        if a1_col[l] != 0.0 {
            w.axpy(a1_col[l], &psis[l], 1.0);
        }
        if a2_col[l] != 0.0 {
            w.axpy(a2_col[l], &w_prevs[l], 1.0);
        }
    }
    w
}

/// Splits column `a_col` by whether each neighbor's estimated observed model
/// equals the agent's desired model. Entries for which `f_hat` is `None` are
/// treated as non-neighbors and must carry zero weight.
pub fn split_weights(a_col: &[f64], f_hat: &[Option<u8>], g: u8) -> (Vec<f64>, Vec<f64>) {
    let mut a1 = vec![0.0; a_col.len()];
    let mut a2 = vec![0.0; a_col.len()];
    for (l, &a) in a_col.iter().enumerate() {
        match f_hat[l] {
            Some(f) if f == g => a1[l] = a,
            Some(_) => a2[l] = a,
            None => debug_assert!(a == 0.0, "weight on non-neighbor {l}"),
        }
    }
    (a1, a2)
}

/// The pair `A1`, `A2` with `A1 + A2 = A` and disjoint supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitWeights {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
}

impl SplitWeights {
    /// Builds the split for every agent from known observed models `f` and
    /// network-frame desired models `g`.
    pub fn from_global(a: &CombinationMatrix, topology: &Topology, f: &ObservedAssignment, g: &[u8]) -> Result<Self> {
        let n = a.len();
        if topology.len() != n || f.len() != n || g.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: topology.len().min(f.len()).min(g.len()),
            });
        }
        let mut a1 = DMatrix::zeros(n, n);
        let mut a2 = DMatrix::zeros(n, n);
        for (k, &gk) in g.iter().enumerate() {
            let col: Vec<f64> = a.matrix().column(k).iter().copied().collect();
            let f_hat: Vec<Option<u8>> = (0..n)
                .map(|l| topology.contains(k, l).then(|| f.get(l)))
                .collect();
            let (c1, c2) = split_weights(&col, &f_hat, gk);
            a1.set_column(k, &DVector::from_vec(c1));
            a2.set_column(k, &DVector::from_vec(c2));
        }
        Ok(SplitWeights { a1, a2 })
    }

    /// Split with every agent desiring model `q`.
    pub fn under_agreement(a: &CombinationMatrix, topology: &Topology, f: &ObservedAssignment, q: u8) -> Result<Self> {
        Self::from_global(a, topology, f, &vec![q; a.len()])
    }

    pub fn from_matrices(a1: DMatrix<f64>, a2: DMatrix<f64>) -> Result<Self> {
        if a1.shape() != a2.shape() || !a1.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a1.nrows(),
                found: a2.nrows(),
            });
        }
        if a1.iter().chain(a2.iter()).any(|v| !(*v >= 0.0)) {
            return invalid("split weights must be nonnegative");
        }
        CombinationMatrix::from_matrix(&a1 + &a2)?;
        Ok(SplitWeights { a1, a2 })
    }

    pub fn sum(&self) -> DMatrix<f64> {
        &self.a1 + &self.a2
    }
}
