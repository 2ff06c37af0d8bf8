//! Fish-schooling motion: each agent heads for its current target estimate,
//! aligns with its neighbors, and keeps a preferred spacing. Range and
//! bearing measurements expose the target through the same linear data
//! model used by static scenarios.

use nalgebra::Vector2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Vec2 = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub x: Vec2,
    pub v: Vec2,
}

impl AgentPose {
    pub fn at_rest(x: Vec2) -> Self {
        AgentPose { x, v: Vec2::zeros() }
    }
}

/// Motion and measurement parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionParams {
    pub dt: f64,
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub d_s: f64,
    /// Range-noise variance per squared unit of distance.
    pub kappa: f64,
    /// Standard deviation of the bearing noise, in radians.
    pub sigma_angle: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            dt: 0.1,
            lambda: 0.3,
            beta: 0.7,
            gamma: 1.0,
            d_s: 3.0,
            kappa: 0.01,
            sigma_angle: 0.05,
        }
    }
}

impl MotionParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.dt, self.lambda, self.beta, self.gamma, self.d_s, self.kappa, self.sigma_angle];
        if all.iter().any(|v| !v.is_finite()) {
            return invalid("motion parameters must be finite");
        }
        if self.dt <= 0.0 {
            return invalid("dt must be positive");
        }
        if self.lambda < 0.0 || self.beta < 0.0 || self.gamma < 0.0 || self.sigma_angle < 0.0 {
            return invalid("lambda, beta, gamma, sigma_angle must be nonnegative");
        }
        if self.d_s <= 0.0 || self.kappa <= 0.0 {
            return invalid("d_s and kappa must be positive");
        }
        Ok(())
    }
}

/// Spacing term: the average over neighbors other than `k` of
/// `(||x_l - x_k|| - d_s)` times the unit vector toward `x_l`.
/// Coincident neighbors contribute nothing.
pub fn cohesion_term(k: usize, positions: &[Vec2], neighbors: &[usize], d_s: f64) -> Vec2 {
    let others = neighbors.iter().filter(|&&l| l != k).count();
    if others == 0 {
        return Vec2::zeros();
    }
    let xk = positions[k];
    let mut delta = Vec2::zeros();
    for &l in neighbors.iter().filter(|&&l| l != k) {
        let diff = positions[l] - xk;
        let dist = diff.norm();
        if dist > 0.0 {
            delta += diff * ((dist - d_s) / dist);
        }
    }
    delta / others as f64
}

/// One motion step: new velocity from goal, alignment and spacing terms,
/// then an Euler position update.
pub fn update_motion(
    pose: &AgentPose,
    w_est: &Vec2,
    neighbor_velocities: &[Vec2],
    weights: &[f64],
    delta: &Vec2,
    params: &MotionParams,
) -> AgentPose {
    let to_goal = w_est - pose.x;
    let dist = to_goal.norm();
    let goal = if dist > 0.0 { to_goal / dist } else { Vec2::zeros() };
    let align: Vec2 = neighbor_velocities
        .iter()
        .zip(weights)
        .fold(Vec2::zeros(), |acc, (v, c)| acc + v * *c);
    let v = goal * params.lambda + align * params.beta + delta * params.gamma;
    AgentPose {
        x: pose.x + v * params.dt,
        v,
    }
}

/// Noisy range and bearing to a target, returned in linear-model form
/// `(d_hat, u)` with `d_hat = u^T w_true + v` and `Var v = kappa ||w_true - x||^2`.
///
/// The bearing is the true direction rotated by a Gaussian angle. When the
/// agent sits on the target the previous bearing (or `e1`) is reused and the
/// noise vanishes.
pub fn measure_target<R: Rng + ?Sized>(
    x: &Vec2,
    prev_dir: Option<&Vec2>,
    w_true: &Vec2,
    params: &MotionParams,
    rng: &mut R,
) -> (f64, Vec2) {
    let to = w_true - x;
    let dist = to.norm();
    if dist == 0.0 {
        let u = prev_dir.copied().unwrap_or_else(|| Vec2::new(1.0, 0.0));
        return (u.dot(w_true), u);
    }
    let angle = if params.sigma_angle > 0.0 {
        Normal::new(0.0, params.sigma_angle).expect("finite sigma").sample(rng)
    } else {
        0.0
    };
    let (s, c) = f64::sin_cos(angle);
    let dir = to / dist;
    let u = Vec2::new(c * dir.x - s * dir.y, s * dir.x + c * dir.y);
    let noise: f64 = Normal::new(0.0, params.kappa.sqrt() * dist).expect("finite sigma").sample(rng);
    // noisy range d = u^T (w_true - x) + v, shifted by u^T x
    let d = u.dot(&to) + noise;
    (d + u.dot(x), u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn cohesion_cases() {
        let d_s = 3.0;
        let at = |d: f64| cohesion_term(0, &[p(0.0, 0.0), p(d, 0.0)], &[0, 1], d_s);
        assert!(at(d_s).norm() < 1e-15);
        assert!((at(2.0 * d_s) - p(d_s, 0.0)).norm() < 1e-15);
        assert!((at(d_s / 2.0) - p(-d_s / 2.0, 0.0)).norm() < 1e-15);
        assert_eq!(cohesion_term(0, &[p(0.0, 0.0)], &[0], d_s), Vec2::zeros());
        assert_eq!(cohesion_term(0, &[p(1.0, 1.0), p(1.0, 1.0)], &[0, 1], d_s), Vec2::zeros());
    }

    #[test]
    fn motion_cases() {
        let params = MotionParams {
            lambda: 1.0,
            beta: 0.0,
            gamma: 0.0,
            ..MotionParams::default()
        };
        let next = update_motion(&AgentPose::at_rest(p(0.0, 0.0)), &p(10.0, 0.0), &[], &[], &Vec2::zeros(), &params);
        assert!((next.v - p(1.0, 0.0)).norm() < 1e-15);
        assert!((next.x - p(0.1, 0.0)).norm() < 1e-15);

        let align = MotionParams {
            lambda: 0.0,
            beta: 1.0,
            gamma: 0.0,
            ..MotionParams::default()
        };
        let vbar = p(0.3, -0.2);
        let next = update_motion(
            &AgentPose::at_rest(p(5.0, 5.0)),
            &p(0.0, 0.0),
            &[vbar, vbar, vbar],
            &[0.2, 0.3, 0.5],
            &Vec2::zeros(),
            &align,
        );
        assert!((next.v - vbar).norm() < 1e-15);
    }

    #[test]
    fn goal_on_top_of_agent() {
        let params = MotionParams::default();
        let next = update_motion(&AgentPose::at_rest(p(1.0, 1.0)), &p(1.0, 1.0), &[], &[], &Vec2::zeros(), &params);
        assert_eq!(next.v, Vec2::zeros());
    }

    #[test]
    fn distance_non_increasing_single_target() {
        let params = MotionParams {
            beta: 0.0,
            gamma: 0.0,
            ..MotionParams::default()
        };
        let target = p(7.0, -3.0);
        let mut pose = AgentPose::at_rest(p(-4.0, 6.0));
        let mut prev = (target - pose.x).norm();
        while prev > params.dt * params.lambda {
            pose = update_motion(&pose, &target, &[], &[], &Vec2::zeros(), &params);
            let d = (target - pose.x).norm();
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn measurement_on_target_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = p(2.0, 3.0);
        let (d, u) = measure_target(&t, None, &t, &MotionParams::default(), &mut rng);
        assert_eq!(u, p(1.0, 0.0));
        assert_eq!(d, u.dot(&t));
    }

    #[test]
    fn measurement_noise_variance() {
        let params = MotionParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = p(1.0, -2.0);
        let w = p(10.0, 10.0);
        let n = 100_000;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let (d, u) = measure_target(&x, None, &w, &params, &mut rng);
            // range form: d_hat - u^T x is the noisy range
            let range = d - u.dot(&x);
            assert!((range - u.dot(&(w - x)) - (d - u.dot(&w))).abs() < 1e-9);
            sum2 += (d - u.dot(&w)).powi(2);
        }
        let expected = params.kappa * (w - x).norm_squared();
        let var = sum2 / n as f64;
        assert!((var - expected).abs() / expected < 0.05, "var {var} expected {expected}");
    }
}
