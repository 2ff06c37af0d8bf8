use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{classify_event, update_direction, Event};
use crate::diffusion::atc_adapt;
use crate::error::{invalid, Error, Result};
use crate::network::{sample_data, AgentEnvironment, ModelPair};

const MIN_TAU_SAMPLES: usize = 10_000;
const MIN_ORACLE_TRIALS: usize = 10_000;

/// Monte Carlo estimate of the fourth-moment ratio
/// `E||u u^T e - R e||^2 / ||R e||^2`, maximized over the probe directions:
/// the model difference and the eigenvectors of `R_u`.
pub fn estimate_tau<R: Rng + ?Sized>(env: &AgentEnvironment, models: &ModelPair, samples: usize, rng: &mut R) -> Result<f64> {
    if models.dim() != env.dim() {
        return Err(Error::DimensionMismatch {
            expected: env.dim(),
            found: models.dim(),
        });
    }
    let eig = env.ru().clone().symmetric_eigen();
    let mut probes = vec![models.get(0) - models.get(1)];
    probes.extend(eig.eigenvectors.column_iter().map(|c| c.into_owned()));
    estimate_tau_with(|r| env.draw_regressor(r), env.ru(), &probes, samples, rng)
}

/// Same estimate for an arbitrary regressor sampler.
pub fn estimate_tau_with<R, F>(
    mut draw: F,
    ru: &nalgebra::DMatrix<f64>,
    probes: &[DVector<f64>],
    samples: usize,
    rng: &mut R,
) -> Result<f64>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> DVector<f64>,
{
    if samples < MIN_TAU_SAMPLES {
        return invalid(format!("need at least {MIN_TAU_SAMPLES} samples, got {samples}"));
    }
    let targets: Vec<DVector<f64>> = probes.iter().map(|e| ru * e).collect();
    if targets.iter().any(|t| t.norm_squared() == 0.0) {
        return invalid("probe direction lies in the null space of R_u");
    }
    let mut acc = vec![0.0; probes.len()];
    for _ in 0..samples {
        let u = draw(rng);
        for ((e, t), a) in probes.iter().zip(&targets).zip(acc.iter_mut()) {
            let dev = &u * u.dot(e) - t;
            *a += dev.norm_squared();
        }
    }
    Ok(acc
        .iter()
        .zip(&targets)
        .map(|(a, t)| a / (samples as f64 * t.norm_squared()))
        .fold(0.0, f64::max))
}

/// Lower bound on detection and upper bound on false alarm,
/// `(1 - 16 nu tau / pi^2, 16 nu tau / pi^2)`.
pub fn pd_pf_bounds(nu: f64, tau: f64) -> (f64, f64) {
    let x = 16.0 * nu * tau / (PI * PI);
    (1.0 - x, x)
}

/// Upper bound on the probability that a belief settles on the wrong side
/// of one half.
pub fn error_bound_pu(alpha: f64, nu: f64, tau: f64) -> Result<f64> {
    let x = 16.0 * nu * tau / (PI * PI);
    if !(x < 0.5) {
        return Err(Error::UndefinedBound(format!(
            "16 nu tau / pi^2 = {x:.4} must be below 0.5"
        )));
    }
    Ok((1.0 - alpha) / (1.0 + alpha) * x * (1.0 - x) / (0.5 - x).powi(2))
}

/// Chebyshev bound on `Pr(zeta < 0.5)` (for `p > 0.5`) or `Pr(zeta > 0.5)`
/// (for `p < 0.5`) when beliefs are driven by i.i.d. Bernoulli(`p`) events.
pub fn belief_error_bound(p: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p == 0.5 {
        return Err(Error::UndefinedBound(format!("bound needs p in [0, 1] and p != 0.5, got {p}")));
    }
    Ok((1.0 - alpha) / (1.0 + alpha) * p * (1.0 - p) / (p - 0.5).powi(2))
}

/// Smallest horizon `C` with `alpha^(C+1) < 1e-3`.
pub fn default_horizon(alpha: f64) -> usize {
    let mut c = 0usize;
    let mut pow = alpha;
    while pow >= 1e-3 {
        pow *= alpha;
        c += 1;
    }
    c
}

/// Empirical tail probabilities of a simulated belief series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefTail {
    pub below_half: f64,
    pub above_half: f64,
    pub trials: usize,
}

/// Simulates `zeta = (1 - alpha) sum_{j=0..=C} alpha^j xi_j` with i.i.d.
/// Bernoulli(`p`) terms.
pub fn belief_error_oracle<R: Rng + ?Sized>(p: f64, alpha: f64, horizon: usize, trials: usize, rng: &mut R) -> Result<BeliefTail> {
    if trials < MIN_ORACLE_TRIALS {
        return invalid(format!("need at least {MIN_ORACLE_TRIALS} trials, got {trials}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("p must lie in [0, 1], got {p}"));
    }
    let (mut below, mut above) = (0usize, 0usize);
    for _ in 0..trials {
        let mut zeta = 0.0;
        let mut w = 1.0 - alpha;
        for _ in 0..=horizon {
            if rng.random::<f64>() < p {
                zeta += w;
            }
            w *= alpha;
        }
        below += usize::from(zeta < 0.5);
        above += usize::from(zeta > 0.5);
    }
    Ok(BeliefTail {
        below_half: below as f64 / trials as f64,
        above_half: above as f64 / trials as f64,
        trials,
    })
}

/// Controlled experiment on the smoothed direction with the estimate held
/// fixed. The recursion starts at its stationary mean `R_u (z - w)`, runs
/// `burn_in` steps, and is then sampled every `stride` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionBenchmark {
    pub nu: f64,
    pub eta: f64,
    pub burn_in: usize,
    pub stride: usize,
    pub samples: usize,
}

impl DirectionBenchmark {
    pub fn new(nu: f64, eta: f64, samples: usize) -> Self {
        DirectionBenchmark {
            nu,
            eta,
            burn_in: 200,
            stride: 100,
            samples,
        }
    }

    fn chain<'a, R: Rng + ?Sized>(
        &'a self,
        env: &'a AgentEnvironment,
        z: &'a DVector<f64>,
        w: &'a DVector<f64>,
    ) -> Result<impl FnMut(&mut R, usize) -> DVector<f64> + 'a> {
        if env.mu() <= 0.0 {
            return invalid("benchmark needs a positive step-size");
        }
        let mut h = env.ru() * (z - w);
        let mu = env.mu();
        let nu = self.nu;
        Ok(move |rng: &mut R, steps: usize| {
            for _ in 0..steps {
                let (d, u) = sample_data(z, env, rng);
                let psi = atc_adapt(w, d, &u, mu);
                h = update_direction(&h, &psi, w, mu, nu);
            }
            h.clone()
        })
    }

    /// Fraction of samples with `||h|| > eta` for an agent observing `z`
    /// whose estimate is pinned at `w`.
    pub fn far_field_probability<R: Rng + ?Sized>(
        &self,
        env: &AgentEnvironment,
        z: &DVector<f64>,
        w: &DVector<f64>,
        rng: &mut R,
    ) -> Result<f64> {
        let mut step = self.chain::<R>(env, z, w)?;
        step(rng, self.burn_in);
        let mut hits = 0usize;
        for _ in 0..self.samples {
            let h = step(rng, self.stride);
            hits += usize::from(h.norm() > self.eta);
        }
        Ok(hits as f64 / self.samples as f64)
    }

    /// Empirical frequencies of (agree, disagree, no-update) events between
    /// two independent agents with pinned estimates. With equal observed
    /// models the agree frequency estimates the detection probability,
    /// otherwise the false-alarm probability.
    #[allow(clippy::too_many_arguments)]
    pub fn event_rates<R: Rng + ?Sized>(
        &self,
        env_k: &AgentEnvironment,
        z_k: &DVector<f64>,
        w_k: &DVector<f64>,
        env_l: &AgentEnvironment,
        z_l: &DVector<f64>,
        w_l: &DVector<f64>,
        rng: &mut R,
    ) -> Result<[f64; 3]> {
        let mut step_k = self.chain::<R>(env_k, z_k, w_k)?;
        let mut step_l = self.chain::<R>(env_l, z_l, w_l)?;
        step_k(rng, self.burn_in);
        step_l(rng, self.burn_in);
        let mut counts = [0usize; 3];
        for _ in 0..self.samples {
            let hk = step_k(rng, self.stride);
            let hl = step_l(rng, self.stride);
            let idx = match classify_event(&hk, &hl, self.eta) {
                Event::Agree => 0,
                Event::Disagree => 1,
                Event::NoUpdate => 2,
            };
            counts[idx] += 1;
        }
        Ok(counts.map(|c| c as f64 / self.samples as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    // Isserlis: E||u u^T e - R e||^2 = (e^T R e) tr(R) + e^T R^2 e for Gaussian u.
    fn gaussian_tau(ru: &DMatrix<f64>, e: &DVector<f64>) -> f64 {
        let re = ru * e;
        (e.dot(&re) * ru.trace() + re.norm_squared()) / re.norm_squared()
    }

    #[test]
    fn tau_zero_for_deterministic_energy() {
        let ru = DMatrix::from_element(1, 1, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let tau = estimate_tau_with(
            |r: &mut ChaCha8Rng| {
                let s = if r.random::<bool>() { 1.0 } else { -1.0 };
                DVector::from_element(1, s * 2f64.sqrt())
            },
            &ru,
            &[DVector::from_element(1, 1.0)],
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(tau < 1e-20);
    }

    #[test]
    fn tau_scalar_gaussian() {
        let ru = DMatrix::from_element(1, 1, 3.0);
        let oracle = gaussian_tau(&ru, &DVector::from_element(1, 1.0));
        assert_eq!(oracle, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tau = estimate_tau_with(
            |r: &mut ChaCha8Rng| {
                let z: f64 = StandardNormal.sample(r);
                DVector::from_element(1, 3f64.sqrt() * z)
            },
            &ru,
            &[DVector::from_element(1, 1.0)],
            200_000,
            &mut rng,
        )
        .unwrap();
        assert!((tau - oracle).abs() / oracle < 0.05, "tau {tau}");
    }

    #[test]
    fn tau_identity_four() {
        let env = AgentEnvironment::new(DMatrix::identity(4, 4), 0.01, 0.005).unwrap();
        let e1 = DVector::from_fn(4, |i, _| f64::from(u8::from(i == 0)));
        assert_eq!(gaussian_tau(env.ru(), &e1), 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let tau = estimate_tau_with(|r| env.draw_regressor(r), env.ru(), &[e1], 200_000, &mut rng).unwrap();
        assert!((tau - 5.0).abs() / 5.0 < 0.05, "tau {tau}");
    }

    #[test]
    fn tau_too_few_samples() {
        let env = AgentEnvironment::new(DMatrix::identity(2, 2), 0.01, 0.005).unwrap();
        let m = ModelPair::from_slices(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(estimate_tau(&env, &m, 100, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn detection_bounds() {
        assert_eq!(pd_pf_bounds(0.0, 3.0), (1.0, 0.0));
        let (pd, pf) = pd_pf_bounds(0.05, 2.0);
        assert!((pf - 1.6 / (PI * PI)).abs() < 1e-15);
        assert!((pf - 0.1621).abs() < 1e-4);
        assert!((pd + pf - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pu_bound() {
        // (0.05/1.95) * 16 * 0.05 / pi^2 * 4 at tau -> 0 gives about 0.0083 per unit tau
        let slope = error_bound_pu(0.95, 0.05, 1e-6).unwrap() / 1e-6;
        assert!((slope - 0.0083).abs() < 1e-4, "slope {slope}");
        assert!(error_bound_pu(0.95, 0.05, 0.5).unwrap() < 0.05 * 0.5);
        assert_eq!(error_bound_pu(0.95, 0.05, 0.0).unwrap(), 0.0);
        assert!(error_bound_pu(0.9999, 0.05, 1.0).unwrap() < 1e-4);
        assert!(matches!(error_bound_pu(0.95, 0.5, 1.0), Err(Error::UndefinedBound(_))));
    }

    #[test]
    fn horizon() {
        let c = default_horizon(0.95);
        assert!(0.95f64.powi(c as i32 + 1) < 1e-3);
        assert!(0.95f64.powi(c as i32) >= 1e-3);
        assert_eq!(c, 134);
    }

    #[test]
    fn oracle_degenerate_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = belief_error_oracle(1.0, 0.95, 14, 10_000, &mut rng).unwrap();
        assert_eq!(t.below_half, 0.0);
        let t = belief_error_oracle(0.0, 0.95, 200, 10_000, &mut rng).unwrap();
        assert_eq!(t.above_half, 0.0);
    }

    #[test]
    fn oracle_respects_bound() {
        let bound = belief_error_bound(0.9, 0.95).unwrap();
        assert!((bound - 0.05 / 1.95 * 0.09 / 0.16).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = belief_error_oracle(0.9, 0.95, 200, 50_000, &mut rng).unwrap();
        assert!(t.below_half <= bound, "{} > {bound}", t.below_half);
    }
}
