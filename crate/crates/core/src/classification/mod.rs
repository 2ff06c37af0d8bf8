//! Update-direction smoothing, pairwise far-field events, beliefs, and the
//! resulting estimate of which neighbors share an agent's observed model.

mod bounds;

pub use bounds::{
    belief_error_bound, belief_error_oracle, default_horizon, error_bound_pu, estimate_tau, estimate_tau_with,
    pd_pf_bounds, BeliefTail, DirectionBenchmark,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Initial belief about every neighbor.
pub const INITIAL_BELIEF: f64 = 0.5;

/// Smoothed update direction:
/// `h = (1 - nu) h_prev + nu (psi - w_prev) / mu`.
pub fn update_direction(h_prev: &DVector<f64>, psi: &DVector<f64>, w_prev: &DVector<f64>, mu: f64, nu: f64) -> DVector<f64> {
    let mut h = h_prev * (1.0 - nu);
    h.axpy(nu / mu, psi, 1.0);
    h.axpy(-nu / mu, w_prev, 1.0);
    h
}

/// Outcome of comparing two smoothed directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    /// Both agents in the far field, directions agree.
    Agree,
    /// Both agents in the far field, directions disagree.
    Disagree,
    /// At least one agent in the near field.
    NoUpdate,
}

pub fn classify_event(h_k: &DVector<f64>, h_l: &DVector<f64>, eta: f64) -> Event {
    let eta2 = eta * eta;
    if h_k.norm_squared() > eta2 && h_l.norm_squared() > eta2 {
        if h_k.dot(h_l) > 0.0 {
            Event::Agree
        } else {
            Event::Disagree
        }
    } else {
        Event::NoUpdate
    }
}

pub fn update_belief(b: f64, event: Event, alpha: f64) -> f64 {
    match event {
        Event::Agree => alpha * b + (1.0 - alpha),
        Event::Disagree => alpha * b,
        Event::NoUpdate => b,
    }
}

/// `1` when the neighbor is believed to share the agent's observed model.
pub fn f_hat(b: f64) -> u8 {
    u8::from(b >= 0.5)
}

/// Smoothing, threshold, and forgetting parameters of the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub nu: f64,
    pub eta: f64,
    pub alpha: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            nu: 0.05,
            eta: 1.0,
            alpha: 0.95,
        }
    }
}

impl ClassifierParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return invalid(format!("nu must lie in (0, 1), got {}", self.nu));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return invalid(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        Ok(())
    }

    /// Whether the estimation step-size is small enough against `nu`
    /// (`mu < nu / 5`) for the classifier to track a slowly moving estimate.
    pub fn timescales_separated(&self, mu: f64) -> bool {
        mu < self.nu / 5.0
    }
}
