use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SplitWeights;
use crate::error::{invalid, Error, Result};
use crate::linalg::spectral_radius;
use crate::network::{AgentEnvironment, CombinationMatrix, ModelPair, ObservedAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Conventional,
    Modified,
}

/// Combination weights for either strategy.
#[derive(Debug, Clone, Copy)]
pub enum Weights<'a> {
    Conventional(&'a CombinationMatrix),
    Modified(&'a SplitWeights),
}

impl Weights<'_> {
    pub fn variant(&self) -> Variant {
        match self {
            Weights::Conventional(_) => Variant::Conventional,
            Weights::Modified(_) => Variant::Modified,
        }
    }

    fn len(&self) -> usize {
        match self {
            Weights::Conventional(a) => a.len(),
            Weights::Modified(s) => s.a1.nrows(),
        }
    }
}

/// Mean recursion `E w~_i = B E w~_{i-1} + y` for the network error
/// `w~_k = w_q - w_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanErrorSystem {
    pub variant: Variant,
    pub agents: usize,
    pub dim: usize,
    pub b: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl MeanErrorSystem {
    /// One step of the mean recursion.
    pub fn step(&self, err: &DVector<f64>) -> DVector<f64> {
        &self.b * err + &self.y
    }

    /// Block `k` of a stacked vector.
    pub fn block<'v>(&self, v: &'v DVector<f64>, k: usize) -> nalgebra::DVectorView<'v, f64> {
        v.rows(k * self.dim, self.dim)
    }
}

/// Builds `B` and `y` with `R = diag{R_k}`, `M = diag{mu_k I}`, and the
/// offset `z~_k = w_q - z_k`.
pub fn build_mean_error_system(
    weights: Weights<'_>,
    envs: &[AgentEnvironment],
    models: &ModelPair,
    f: &ObservedAssignment,
    q: u8,
) -> Result<MeanErrorSystem> {
    let n = weights.len();
    if envs.len() != n || f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if envs.len() != n { envs.len() } else { f.len() },
        });
    }
    let m = models.dim();
    if let Some(e) = envs.iter().find(|e| e.dim() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: e.dim(),
        });
    }
    if q > 1 {
        return invalid(format!("desired model index must be 0 or 1, got {q}"));
    }
    let nm = n * m;

    // (I - M R) and M R z~ are block diagonal / block stacked.
    let mut i_minus_mr = DMatrix::identity(nm, nm);
    let mut mrz = DVector::zeros(nm);
    for (k, env) in envs.iter().enumerate() {
        let mr = env.ru() * env.mu();
        let mut blk = i_minus_mr.view_mut((k * m, k * m), (m, m));
        blk -= &mr;
        let ztilde = models.get(q) - models.get(f.get(k));
        mrz.rows_mut(k * m, m).copy_from(&(mr * ztilde));
    }

    let (a1, a2) = match weights {
        Weights::Conventional(a) => (a.matrix().clone(), None),
        Weights::Modified(s) => (s.a1.clone(), Some(&s.a2)),
    };
    let mut b = kron_t_times(&a1, &i_minus_mr, m);
    let y = kron_t_times_vec(&a1, &mrz, m);
    if let Some(a2) = a2 {
        for k in 0..n {
            for l in 0..n {
                let w = a2[(l, k)];
                if w != 0.0 {
                    for j in 0..m {
                        b[(k * m + j, l * m + j)] += w;
                    }
                }
            }
        }
    }
    Ok(MeanErrorSystem {
        variant: weights.variant(),
        agents: n,
        dim: m,
        b,
        y,
    })
}

// (A kron I_m)^T X where X is block diagonal with m x m blocks.
fn kron_t_times(a: &DMatrix<f64>, x: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(n * m, n * m);
    for k in 0..n {
        for l in 0..n {
            let w = a[(l, k)];
            if w != 0.0 {
                let src = x.view((l * m, l * m), (m, m)) * w;
                out.view_mut((k * m, l * m), (m, m)).copy_from(&src);
            }
        }
    }
    out
}

fn kron_t_times_vec(a: &DMatrix<f64>, v: &DVector<f64>, m: usize) -> DVector<f64> {
    let n = a.nrows();
    let mut out = DVector::zeros(n * m);
    for k in 0..n {
        for l in 0..n {
            let w = a[(l, k)];
            if w != 0.0 {
                let mut dst = out.rows_mut(k * m, m);
                dst.axpy(w, &v.rows(l * m, m), 1.0);
            }
        }
    }
    out
}

/// Sufficient step-size condition `0 < mu < 2 / rho(R_u)`.
pub fn check_stepsize_stability(mu: f64, ru: &DMatrix<f64>) -> bool {
    match ru.clone().symmetric_eigen().eigenvalues.max() {
        lam if lam > 0.0 => mu > 0.0 && mu < 2.0 / lam,
        _ => false,
    }
}

/// Spectral radius of `B`, the rate `r = rho(B)^2`, and, when a lower bound
/// is supplied, whether `lower <= r < 1` holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub spectral_radius: f64,
    pub rate: f64,
    pub stable: bool,
    pub lower_bound: Option<f64>,
    pub within_bound: Option<bool>,
}

/// Rate report for a mean-error matrix. `min_mu_lambda` is
/// `mu * lambda_min(R_u)` used for the lower bound `(1 - mu lambda_min)^2`.
pub fn convergence_rate(b: &DMatrix<f64>, min_mu_lambda: Option<f64>) -> Result<RateReport> {
    let rho = spectral_radius(b)?;
    let rate = rho * rho;
    let lower_bound = min_mu_lambda.map(|x| (1.0 - x).powi(2));
    // slack for the eigensolver's rounding
    let within_bound = lower_bound.map(|lb| lb <= rate * (1.0 + 1e-9) + 1e-12 && rate < 1.0);
    Ok(RateReport {
        spectral_radius: rho,
        rate,
        stable: rho < 1.0,
        lower_bound,
        within_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::SplitWeights;
    use crate::network::{three_node_line, uniform_weights, Topology};

    fn models() -> ModelPair {
        ModelPair::from_slices(&[1.0, -2.0], &[0.5, 3.0]).unwrap()
    }

    #[test]
    fn single_agent_system() {
        #[rustfmt::skip]
        let ru = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let env = AgentEnvironment::new(ru.clone(), 0.1, 0.05).unwrap();
        let a = CombinationMatrix::from_matrix(DMatrix::identity(1, 1)).unwrap();
        let f = ObservedAssignment::uniform(1, 1);
        let sys = build_mean_error_system(Weights::Conventional(&a), &[env], &models(), &f, 0).unwrap();
        let expected_b = DMatrix::identity(2, 2) - &ru * 0.05;
        assert!((&sys.b - expected_b).amax() < 1e-15);
        let ztilde = models().get(0) - models().get(1);
        assert!((&sys.y - &ru * 0.05 * ztilde).amax() < 1e-15);
    }

    #[test]
    fn three_node_bias_block() {
        let (_, a) = three_node_line(0.3, 0.4, 0.2, 0.7).unwrap();
        let ru = DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, 1.2]));
        let mu = 0.01;
        let envs = vec![AgentEnvironment::new(ru.clone(), 0.01, mu).unwrap(); 3];
        let f = ObservedAssignment::new(vec![0, 1, 1]).unwrap();
        let m = models();
        let sys = build_mean_error_system(Weights::Conventional(&a), &envs, &m, &f, 0).unwrap();
        let expected = &ru * mu * (m.get(0) - m.get(1));
        assert!((sys.block(&sys.y, 2) - expected).amax() < 1e-14);
    }

    #[test]
    fn modified_under_agreement_has_zero_offset() {
        let t = Topology::path(4).unwrap();
        let a = uniform_weights(&t);
        let env = AgentEnvironment::new(DMatrix::identity(2, 2), 0.01, 0.05).unwrap();
        let f = ObservedAssignment::new(vec![0, 1, 0, 1]).unwrap();
        for q in [0, 1] {
            let s = SplitWeights::under_agreement(&a, &t, &f, q).unwrap();
            let sys = build_mean_error_system(Weights::Modified(&s), &vec![env.clone(); 4], &models(), &f, q).unwrap();
            assert!(sys.y.iter().all(|v| *v == 0.0));
            assert!(convergence_rate(&sys.b, Some(0.05)).unwrap().stable);
        }
    }

    #[test]
    fn stability_condition() {
        let id = DMatrix::identity(3, 3);
        assert!(check_stepsize_stability(0.005, &id));
        assert!(!check_stepsize_stability(2.5, &id));
        assert!(check_stepsize_stability(0.99, &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))));
        assert!(!check_stepsize_stability(0.0, &id));
    }

    #[test]
    fn rate_cases() {
        let b = DMatrix::identity(2, 2) * 0.9;
        let r = convergence_rate(&b, Some(0.1)).unwrap();
        assert!((r.rate - 0.81).abs() < 1e-12);
        assert_eq!(r.within_bound, Some(true));
        let env = AgentEnvironment::new(DMatrix::identity(2, 2), 0.01, 0.0).unwrap();
        let t = Topology::complete(3).unwrap();
        let a = uniform_weights(&t);
        let f = ObservedAssignment::uniform(3, 0);
        let sys = build_mean_error_system(Weights::Conventional(&a), &vec![env; 3], &models(), &f, 0).unwrap();
        let r = convergence_rate(&sys.b, None).unwrap();
        assert!((r.rate - 1.0).abs() < 1e-12);
        assert!(!r.stable);
    }
}
