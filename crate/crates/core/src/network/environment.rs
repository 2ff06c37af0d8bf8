use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Per-agent data statistics and step-size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvironmentSpec", into = "EnvironmentSpec")]
pub struct AgentEnvironment {
    ru: DMatrix<f64>,
    ru_sqrt: DMatrix<f64>,
    sigma_v2: f64,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
struct EnvironmentSpec {
    ru: DMatrix<f64>,
    sigma_v2: f64,
    mu: f64,
}

impl TryFrom<EnvironmentSpec> for AgentEnvironment {
    type Error = Error;

    fn try_from(s: EnvironmentSpec) -> Result<Self> {
        AgentEnvironment::new(s.ru, s.sigma_v2, s.mu)
    }
}

impl From<AgentEnvironment> for EnvironmentSpec {
    fn from(e: AgentEnvironment) -> Self {
        EnvironmentSpec {
            ru: e.ru,
            sigma_v2: e.sigma_v2,
            mu: e.mu,
        }
    }
}

impl AgentEnvironment {
    /// `ru` must be symmetric positive definite, `sigma_v2 >= 0`, `mu >= 0`.
    ///
    /// A zero step-size is accepted so that agents can be configured to skip
    /// adaptation; stability checks reject it where a positive step is needed.
    pub fn new(ru: DMatrix<f64>, sigma_v2: f64, mu: f64) -> Result<Self> {
        if !ru.is_square() || ru.nrows() == 0 {
            return invalid("regressor covariance must be a non-empty square matrix");
        }
        let asym = (&ru - ru.transpose()).amax();
        if asym > 1e-12 * ru.amax().max(1.0) {
            return invalid("regressor covariance must be symmetric");
        }
        let chol = ru
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("regressor covariance must be positive definite".into()))?;
        if !(sigma_v2 >= 0.0) || !sigma_v2.is_finite() {
            return invalid(format!("noise variance must be finite and nonnegative, got {sigma_v2}"));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return invalid(format!("step-size must be finite and nonnegative, got {mu}"));
        }
        Ok(AgentEnvironment {
            ru_sqrt: chol.l(),
            ru,
            sigma_v2,
            mu,
        })
    }

    pub fn dim(&self) -> usize {
        self.ru.nrows()
    }

    pub fn ru(&self) -> &DMatrix<f64> {
        &self.ru
    }

    pub fn sigma_v2(&self) -> f64 {
        self.sigma_v2
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        AgentEnvironment::new(self.ru.clone(), self.sigma_v2, mu)
    }

    /// Draws a zero-mean Gaussian regressor with covariance `R_u` (as a column
    /// vector; it multiplies the model as a row).
    pub fn draw_regressor<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let m = self.dim();
        let z = DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
        &self.ru_sqrt * z
    }
}

/// One sample of the linear data model `d = u z + v`.
///
/// Returns `(d, u)` with `u ~ N(0, R_u)` and `v ~ N(0, sigma_v2)` drawn
/// independently of everything else.
pub fn sample_data<R: Rng + ?Sized>(z: &DVector<f64>, env: &AgentEnvironment, rng: &mut R) -> (f64, DVector<f64>) {
    let u = env.draw_regressor(rng);
    let noise: f64 = StandardNormal.sample(rng);
    let d = u.dot(z) + env.sigma_v2.sqrt() * noise;
    (d, u)
}

/// Homogeneous agents with a shared diagonal covariance whose entries are
/// drawn uniformly from `ru_range`, and per-agent noise variances drawn
/// uniformly in decibels from `noise_db_range`.
pub fn random_environments<R: Rng + ?Sized>(
    n: usize,
    dim: usize,
    mu: f64,
    ru_range: (f64, f64),
    noise_db_range: (f64, f64),
    rng: &mut R,
) -> Result<Vec<AgentEnvironment>> {
    if ru_range.0 <= 0.0 || ru_range.1 < ru_range.0 {
        return invalid(format!("bad covariance range {ru_range:?}"));
    }
    if noise_db_range.1 < noise_db_range.0 {
        return invalid(format!("bad noise range {noise_db_range:?}"));
    }
    let diag = DVector::from_fn(dim, |_, _| uniform(rng, ru_range));
    let ru = DMatrix::from_diagonal(&diag);
    (0..n)
        .map(|_| {
            let db = uniform(rng, noise_db_range);
            AgentEnvironment::new(ru.clone(), 10f64.powf(db / 10.0), mu)
        })
        .collect()
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
